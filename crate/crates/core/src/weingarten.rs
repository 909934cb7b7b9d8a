//! Reconstruction of support functions from curvature data.
//!
//! Solves `h'' + h = R` for 2π-periodic `h` orthogonal to `cos` and `sin`
//! through the Green kernel
//!
//! ```text
//! h(θ) = κ ∫_{-π}^{π} G₀(t) R(θ + t) dt,   G₀(t) = (1 - |t|/π) sin|t|,   κ = 1/2.
//! ```
//!
//! `κ` is pinned by requiring the needle measure `π(δ_α + δ_{α+π})` to
//! reproduce `(π/2)|sin(θ - α)|` exactly.

use std::f64::consts::{PI, TAU};

use crate::error::{GeomError, Result};
use crate::grid::{wrap_angle, wrap_signed, AngleGrid};
use crate::measure::{Atom, CurvatureMeasure};
use crate::optimize::golden_min;
use crate::support::{FourierSeries, GridSamples, Polygon, SupportFn};

/// Normalization applied to `G₀` in every reconstruction.
pub const KERNEL_SCALE: f64 = 0.5;

/// Moment tolerance for the closure (Fredholm) condition.
pub const CLOSURE_TOL: f64 = 1e-8;

/// Unscaled kernel `G₀(t)`, 2π-periodic and even.
pub fn kernel_unscaled(t: f64) -> f64 {
    let a = wrap_signed(t).abs();
    (1.0 - a / PI) * a.sin()
}

/// Scaled kernel `κ G₀(t)`.
pub fn green(t: f64) -> f64 {
    KERNEL_SCALE * kernel_unscaled(t)
}

/// Derivative of `G₀`. At the kink `t ≡ 0` this returns the left limit `-1`,
/// which makes `θ ↦ G₀(θ_k - θ)` report its right derivative.
pub fn kernel_unscaled_deriv(t: f64) -> f64 {
    let s = wrap_signed(t);
    let a = s.abs();
    let d = a.cos() - a.sin() / PI - a / PI * a.cos();
    if s > 0.0 {
        d
    } else {
        -d
    }
}

/// `G₄(τ) = G(τ) + G(τ - π/2) + G(-τ) + G(-τ - π/2)` with the scaled kernel.
pub fn g4(tau: f64) -> f64 {
    green(tau) + green(tau - PI / 2.0) + green(-tau) + green(-tau - PI / 2.0)
}

/// Minimum of [`g4`] over `[0, π]` with the kernel scale `κ = 1/2`.
pub const G4_MIN: f64 = 0.5;

/// `G₄` on `n + 1` equispaced points of `[0, π]`.
pub fn g4_table(n: usize) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|i| {
            let t = PI * i as f64 / n as f64;
            (t, g4(t))
        })
        .collect()
}

/// Global minimum of `G₄` on `[0, π]` and every local minimum within `tol`
/// of it, located on an `n`-point scan and refined by golden section.
pub fn g4_minimum_set(n: usize, tol: f64) -> (f64, Vec<f64>) {
    let table = g4_table(n);
    let h = PI / n as f64;
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 0..table.len() {
        let v = table[i].1;
        let left = if i > 0 { table[i - 1].1 } else { f64::INFINITY };
        let right = if i + 1 < table.len() { table[i + 1].1 } else { f64::INFINITY };
        if v <= left && v <= right {
            let lo = (table[i].0 - h).max(0.0);
            let hi = (table[i].0 + h).min(PI);
            minima.push(golden_min(g4, lo, hi, 1e-12));
        }
    }
    let best = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let mut at: Vec<f64> = minima
        .into_iter()
        .filter(|m| m.1 <= best + tol)
        .map(|m| m.0)
        .collect();
    at.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    (best, at)
}

/// Support function of the atomic measure `Σ w_k δ_{θ_k}` (Green form).
pub fn atoms_eval(atoms: &[Atom], theta: f64) -> f64 {
    atoms
        .iter()
        .map(|a| a.weight * kernel_unscaled(a.angle - theta))
        .sum::<f64>()
        * KERNEL_SCALE
}

/// Right derivative of [`atoms_eval`].
pub fn atoms_deriv(atoms: &[Atom], theta: f64) -> f64 {
    -atoms
        .iter()
        .map(|a| a.weight * kernel_unscaled_deriv(a.angle - theta))
        .sum::<f64>()
        * KERNEL_SCALE
}

/// Solve `h'' + h = R`.
///
/// Purely atomic measures come back as exact polygons (or the needle `Σ_α`);
/// a density part is convolved on its own grid and the result is a grid form.
pub fn solve(measure: &CurvatureMeasure) -> Result<SupportFn> {
    measure.check_nonnegative()?;
    let (mc, ms) = measure.first_moments();
    if mc.abs() > CLOSURE_TOL || ms.abs() > CLOSURE_TOL {
        return Err(GeomError::NotClosed { cos: mc, sin: ms });
    }
    match &measure.density {
        None => Ok(SupportFn::from_polygon(Polygon::from_atoms_unchecked(
            measure.atoms.clone(),
        ))),
        Some(d) => {
            let grid = d.grid();
            Ok(SupportFn::Grid(solve_on(measure, grid)?))
        }
    }
}

/// Solve `h'' + h = R` and sample the result on `grid`.
///
/// The density (if any) must live on the same grid. Its convolution uses the
/// trapezoid rule with Euler-Maclaurin corrections for the kernel kink at
/// `t = 0`, which keeps the scheme sixth-order for smooth densities.
pub fn solve_on(measure: &CurvatureMeasure, grid: AngleGrid) -> Result<GridSamples> {
    let n = grid.len();
    let mut samples: Vec<f64> = grid
        .nodes()
        .map(|t| atoms_eval(&measure.atoms, t))
        .collect();
    if let Some(d) = &measure.density {
        if d.grid() != grid {
            return Err(GeomError::SampleCount {
                expected: n,
                got: d.grid().len(),
            });
        }
        let r = d.samples();
        let dt = grid.spacing();
        let table: Vec<f64> = (0..n).map(|j| kernel_unscaled(j as f64 * dt)).collect();
        let dt2 = dt * dt;
        for (i, out) in samples.iter_mut().enumerate() {
            // Σ_j G₀(t_j) R(θ_i + t_j), fixed summation order
            let mut acc = 0.0;
            for (j, g) in table.iter().enumerate() {
                acc += g * r[(i + j) % n];
            }
            let ri = r[i];
            let rpp = (r[(i + 1) % n] - 2.0 * ri + r[(i + n - 1) % n]) / dt2;
            let corrected = acc * dt + dt2 * ri / 6.0 + dt2 * dt2 * (2.0 * ri - 6.0 * rpp) / 720.0;
            *out += KERNEL_SCALE * corrected;
        }
    }
    GridSamples::new(grid, samples)
}

/// Support function of a polygon from its outer normals and side lengths.
///
/// The result has its Steiner point at the origin and perimeter `Σ lengths`;
/// with `normalize` the lengths are rescaled to perimeter 2π. Two antipodal
/// sides of length π come back as the needle `Σ_α`.
pub fn polygon_support(normals: &[f64], lengths: &[f64], normalize: bool) -> Result<SupportFn> {
    let poly = Polygon::new(normals, lengths)?;
    let shape = SupportFn::from_polygon(poly);
    if normalize {
        shape.normalize_to_class_a()
    } else {
        Ok(shape)
    }
}

/// Curvature measure `h'' + h` of a support function.
///
/// Exact atoms for needles, polygons and triangles; a sampled density on the
/// default grid for Fourier forms, and the discrete `D²h + h` for grid forms.
pub fn curvature_of(h: &SupportFn) -> CurvatureMeasure {
    curvature_on(h, AngleGrid::default())
}

/// As [`curvature_of`], choosing the sampling grid for Fourier forms.
pub fn curvature_on(h: &SupportFn, grid: AngleGrid) -> CurvatureMeasure {
    if let Some(atoms) = h.atoms() {
        return CurvatureMeasure::from_atoms(atoms);
    }
    match h {
        SupportFn::Fourier(f) => {
            let samples = grid.nodes().map(|t| f.curvature(t)).collect();
            CurvatureMeasure::from_density(GridSamples::new(grid, samples).expect("grid length"))
        }
        SupportFn::Grid(g) => CurvatureMeasure::from_density(g.discrete_curvature()),
        _ => unreachable!("atomic forms handled above"),
    }
}

/// Outer-normal angles of a triangle in class 𝒜.
///
/// Stored in canonical order: `θ₁ ∈ [0, 2π)` and `θ₁ < θ₂ < θ₃ < θ₁ + 2π`
/// with every gap (including `2π + θ₁ - θ₃`) in `(0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSpec {
    theta: [f64; 3],
}

impl TriangleSpec {
    /// Validate three normal angles, given in counterclockwise order.
    pub fn new(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        let d12 = t2 - t1;
        let d23 = t3 - t2;
        let d31 = TAU + t1 - t3;
        if !(d12 > 0.0 && d12 < PI) {
            return Err(GeomError::BadTriangle("0 < θ₂ - θ₁ < π"));
        }
        if !(d23 > 0.0 && d23 < PI) {
            return Err(GeomError::BadTriangle("0 < θ₃ - θ₂ < π"));
        }
        if !(d31 > 0.0 && d31 < PI) {
            return Err(GeomError::BadTriangle("0 < 2π + θ₁ - θ₃ < π"));
        }
        let base = wrap_angle(t1);
        Ok(Self {
            theta: [base, base + d12, base + d12 + d23],
        })
    }

    /// Build from a starting normal and the first two gaps.
    pub fn from_gaps(t1: f64, d12: f64, d23: f64) -> Result<Self> {
        Self::new(t1, t1 + d12, t1 + d12 + d23)
    }

    /// Equilateral triangle with a normal at `t1`.
    pub fn equilateral(t1: f64) -> Self {
        Self::from_gaps(t1, TAU / 3.0, TAU / 3.0).expect("equilateral gaps are valid")
    }

    pub fn angles(&self) -> [f64; 3] {
        self.theta
    }

    /// Gaps `(θ₂ - θ₁, θ₃ - θ₂, 2π + θ₁ - θ₃)`.
    pub fn gaps(&self) -> [f64; 3] {
        let [a, b, c] = self.theta;
        [b - a, c - b, TAU + a - c]
    }

    /// Smallest distance of a gap to the excluded values 0 and π.
    pub fn margin(&self) -> f64 {
        self.gaps()
            .iter()
            .map(|g| g.min(PI - g))
            .fold(f64::INFINITY, f64::min)
    }

    /// `sin(θ₃-θ₂) + sin(θ₂-θ₁) + sin(θ₁-θ₃)`.
    pub fn sine_sum(&self) -> f64 {
        let [t1, t2, t3] = self.theta;
        (t3 - t2).sin() + (t2 - t1).sin() + (t1 - t3).sin()
    }

    /// Side lengths from the law of sines, perimeter 2π.
    pub fn lengths(&self) -> [f64; 3] {
        let [t1, t2, t3] = self.theta;
        let s = self.sine_sum();
        [
            TAU * (t3 - t2).sin() / s,
            TAU * (t1 - t3).sin() / s,
            TAU * (t2 - t1).sin() / s,
        ]
    }

    /// `∂a_i/∂θ_j` by the quotient rule applied to the law-of-sines lengths.
    pub fn length_jacobian(&self) -> [[f64; 3]; 3] {
        let [t1, t2, t3] = self.theta;
        let num = [(t3 - t2).sin(), (t1 - t3).sin(), (t2 - t1).sin()];
        // ∂num_i/∂θ_j
        let c23 = (t3 - t2).cos();
        let c31 = (t1 - t3).cos();
        let c12 = (t2 - t1).cos();
        let dnum = [[0.0, -c23, c23], [c31, 0.0, -c31], [-c12, c12, 0.0]];
        let s: f64 = num.iter().sum();
        let ds = [
            dnum[0][0] + dnum[1][0] + dnum[2][0],
            dnum[0][1] + dnum[1][1] + dnum[2][1],
            dnum[0][2] + dnum[1][2] + dnum[2][2],
        ];
        let mut jac = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                jac[i][j] = TAU * (dnum[i][j] * s - num[i] * ds[j]) / (s * s);
            }
        }
        jac
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let a = self.lengths();
        self.theta
            .iter()
            .zip(a)
            .map(|(&t, w)| Atom::new(wrap_angle(t), w))
            .collect()
    }

    /// `φ(θ) = (1/2π) Σ a_k θ_k sin(θ - θ_k)` for the labelling with all
    /// angles in `[0, 2π)`.
    fn reduced(&self) -> ([f64; 3], [f64; 3]) {
        // rotate labels until the angles, reduced mod 2π, increase
        let a = self.lengths();
        let mut t = self.theta;
        let mut w = a;
        while t[2] >= TAU {
            t = [t[2] - TAU, t[0], t[1]];
            w = [w[2], w[0], w[1]];
        }
        (t, w)
    }

    /// Piecewise closed form of the support function (Steiner point at the
    /// origin), with angles taken in `[0, 2π)`.
    pub fn eval(&self, theta: f64) -> f64 {
        let (t, a) = self.reduced();
        let x = wrap_angle(theta);
        let phi = (a[0] * t[0] * (x - t[0]).sin()
            + a[1] * t[1] * (x - t[1]).sin()
            + a[2] * t[2] * (x - t[2]).sin())
            / TAU;
        if x >= t[0] && x < t[1] {
            phi + a[0] * (x - t[0]).sin()
        } else if x >= t[1] && x < t[2] {
            phi - a[2] * (x - t[2]).sin()
        } else {
            phi
        }
    }

    /// Right derivative of [`TriangleSpec::eval`].
    pub fn deriv(&self, theta: f64) -> f64 {
        let (t, a) = self.reduced();
        let x = wrap_angle(theta);
        let dphi = (a[0] * t[0] * (x - t[0]).cos()
            + a[1] * t[1] * (x - t[1]).cos()
            + a[2] * t[2] * (x - t[2]).cos())
            / TAU;
        if x >= t[0] && x < t[1] {
            dphi + a[0] * (x - t[0]).cos()
        } else if x >= t[1] && x < t[2] {
            dphi - a[2] * (x - t[2]).cos()
        } else {
            dphi
        }
    }

    pub fn rotated(&self, phi: f64) -> Self {
        let [a, b, c] = self.theta;
        Self::new(a + phi, b + phi, c + phi).expect("rotation preserves gaps")
    }
}

/// Closed-form support function of the triangle `T`.
pub fn triangle_support(t: &TriangleSpec) -> SupportFn {
    SupportFn::Triangle(*t)
}

/// Equilateral support function written per arc:
/// `r cos(θ - θ₁ - π/3)`, `r cos(θ - θ₁ - π)`, `r cos(θ - θ₁ - 5π/3)` with
/// circumradius `r = 2π/(3√3)`.
pub fn equilateral_closed_form(t1: f64, theta: f64) -> f64 {
    let r = TAU / (3.0 * 3f64.sqrt());
    let x = wrap_angle(theta - t1);
    if x < TAU / 3.0 {
        r * (x - PI / 3.0).cos()
    } else if x < 2.0 * TAU / 3.0 {
        r * (x - PI).cos()
    } else {
        r * (x - 5.0 * PI / 3.0).cos()
    }
}

/// Smooth density `c₀ + Σ (a_k cos kθ + b_k sin kθ)` sampled on a grid.
pub fn sample_density(f: &FourierSeries, grid: AngleGrid) -> GridSamples {
    GridSamples::new(grid, grid.nodes().map(|t| f.eval(t)).collect()).expect("grid length")
}
