//! Support functions of planar convex sets.
//!
//! `h(θ)` is the distance from the origin to the support line with outer
//! normal `(cos θ, sin θ)`. Shapes are kept in closed form whenever possible
//! (needles, polygons, triangles, trigonometric polynomials); sampled data
//! lives on a uniform [`AngleGrid`] and is interpolated linearly.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{GeomError, Result};
use crate::grid::{wrap_angle, AngleGrid, DEFAULT_GRID};
use crate::measure::Atom;
use crate::optimize::golden_max;
use crate::quadrature::{periodic_rule, trapezoid, Rule};
use crate::weingarten::{atoms_deriv, atoms_eval, TriangleSpec};

pub type Point = [f64; 2];

/// Tolerance on `h'' + h` for closed forms.
pub const CONVEX_TOL: f64 = 1e-8;

/// Minimum node count used when scanning for extrema or sup-norms.
pub const SCAN_NODES: usize = 2048;

/// Ties within this band are resolved by the smallest angle.
pub const TIE_TOL: f64 = 1e-12;

/// Longest Gauss-Legendre panel used for integrals over the circle.
pub const PANEL_LEN: f64 = TAU / 256.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierTerm {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

/// `c₀ + Σ a_k cos kθ + b_k sin kθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub c0: f64,
    pub terms: Vec<FourierTerm>,
}

impl FourierSeries {
    /// Builds a series, folding `k = 0` entries into the constant and merging
    /// repeated frequencies.
    pub fn new(c0: f64, terms: impl IntoIterator<Item = (u32, f64, f64)>) -> Self {
        let mut c = c0;
        let mut out: Vec<FourierTerm> = Vec::new();
        for (k, a, b) in terms {
            if k == 0 {
                c += a;
                continue;
            }
            match out.iter_mut().find(|t| t.k == k) {
                Some(t) => {
                    t.a += a;
                    t.b += b;
                }
                None => out.push(FourierTerm { k, a, b }),
            }
        }
        out.sort_by_key(|t| t.k);
        Self { c0: c, terms: out }
    }

    pub fn constant(c0: f64) -> Self {
        Self {
            c0,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_pair(t).0
    }

    /// `(f, f')` from a single `sin_cos`, stepping `e^{ikθ}` by angle addition.
    pub fn eval_pair(&self, t: f64) -> (f64, f64) {
        let (s1, c1) = t.sin_cos();
        let (mut sk, mut ck) = (0.0, 1.0);
        let mut k = 0;
        let (mut v, mut d) = (self.c0, 0.0);
        for term in &self.terms {
            while k < term.k {
                let c = ck * c1 - sk * s1;
                sk = sk * c1 + ck * s1;
                ck = c;
                k += 1;
            }
            v += term.a * ck + term.b * sk;
            d += k as f64 * (term.b * ck - term.a * sk);
        }
        (v, d)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.eval_pair(t).1
    }

    /// `h'' + h`.
    pub fn curvature(&self, t: f64) -> f64 {
        self.c0
            + self
                .terms
                .iter()
                .map(|f| {
                    let k = f.k as f64;
                    let (s, c) = (k * t).sin_cos();
                    (1.0 - k * k) * (f.a * c + f.b * s)
                })
                .sum::<f64>()
    }

    pub fn max_k(&self) -> u32 {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }

    pub fn first_harmonic(&self) -> (f64, f64) {
        self.terms
            .iter()
            .filter(|t| t.k == 1)
            .fold((0.0, 0.0), |(a, b), t| (a + t.a, b + t.b))
    }

    /// `∫₀^{2π} f²` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        TAU * self.c0 * self.c0
            + PI * self
                .terms
                .iter()
                .map(|t| t.a * t.a + t.b * t.b)
                .sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(
            self.c0 * s,
            self.terms.iter().map(|t| (t.k, t.a * s, t.b * s)),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.c0 - other.c0,
            self.terms
                .iter()
                .map(|t| (t.k, t.a, t.b))
                .chain(other.terms.iter().map(|t| (t.k, -t.a, -t.b))),
        )
    }

    fn rotated(&self, phi: f64) -> Self {
        // f(θ - φ)
        Self::new(
            self.c0,
            self.terms.iter().map(|t| {
                let (s, c) = (t.k as f64 * phi).sin_cos();
                (t.k, t.a * c - t.b * s, t.a * s + t.b * c)
            }),
        )
    }
}

/// Uniform samples of a support function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    grid: AngleGrid,
    samples: Vec<f64>,
}

impl GridSamples {
    pub fn new(grid: AngleGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(GeomError::SampleCount {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: AngleGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            samples: grid.nodes().map(f).collect(),
        }
    }

    pub fn grid(&self) -> AngleGrid {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|v| v * k).collect(),
        }
    }

    fn at(&self, i: isize) -> f64 {
        let n = self.samples.len() as isize;
        self.samples[i.rem_euclid(n) as usize]
    }

    /// Piecewise-linear interpolation.
    pub fn eval(&self, theta: f64) -> f64 {
        let x = wrap_angle(theta) / self.grid.spacing();
        let i = x.floor();
        let f = x - i;
        let i = i as isize;
        self.at(i) * (1.0 - f) + self.at(i + 1) * f
    }

    /// Fourth-order central difference of the samples at node `i`.
    pub fn node_deriv(&self, i: usize) -> f64 {
        let i = i as isize;
        let dt = self.grid.spacing();
        (8.0 * (self.at(i + 1) - self.at(i - 1)) - (self.at(i + 2) - self.at(i - 2))) / (12.0 * dt)
    }

    /// Linear interpolation of the nodal derivative estimates.
    pub fn deriv(&self, theta: f64) -> f64 {
        let x = wrap_angle(theta) / self.grid.spacing();
        let i = x.floor();
        let f = x - i;
        let n = self.samples.len();
        let i = i as usize % n;
        self.node_deriv(i) * (1.0 - f) + self.node_deriv((i + 1) % n) * f
    }

    /// `D²h + h` at the nodes (second central difference).
    pub fn discrete_curvature(&self) -> GridSamples {
        let dt2 = self.grid.spacing().powi(2);
        let samples = (0..self.samples.len() as isize)
            .map(|i| (self.at(i + 1) - 2.0 * self.at(i) + self.at(i - 1)) / dt2 + self.at(i))
            .collect();
        GridSamples {
            grid: self.grid,
            samples,
        }
    }
}

/// Polygon given by outer normals and side lengths; support function taken
/// with the Steiner point at `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    atoms: Vec<Atom>,
    offset: Point,
}

impl Polygon {
    /// Validates positivity and closure `Σ a_j (cos θ_j, sin θ_j) = 0`.
    pub fn new(normals: &[f64], lengths: &[f64]) -> Result<Self> {
        if normals.len() != lengths.len() {
            return Err(GeomError::BadPolygon(format!(
                "{} normals but {} lengths",
                normals.len(),
                lengths.len()
            )));
        }
        if normals.len() < 2 {
            return Err(GeomError::BadPolygon("need at least two sides".into()));
        }
        if let Some(l) = lengths.iter().find(|l| !l.is_finite()) {
            return Err(GeomError::BadPolygon(format!("side length {l} is not finite")));
        }
        if let Some((&angle, &value)) = normals.iter().zip(lengths).find(|(_, l)| !(**l > 0.0)) {
            // a side of nonpositive length is a negative curvature atom
            return Err(GeomError::NotConvex {
                angle,
                value,
                tol: 0.0,
            });
        }
        if normals.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GeomError::BadPolygon("normals must be strictly increasing".into()));
        }
        if normals[normals.len() - 1] - normals[0] >= TAU {
            return Err(GeomError::BadPolygon("normals must span less than 2π".into()));
        }
        let atoms: Vec<Atom> = normals
            .iter()
            .zip(lengths)
            .map(|(&t, &w)| Atom::new(t, w))
            .collect();
        let per: f64 = lengths.iter().sum();
        let (c, s) = atoms.iter().fold((0.0, 0.0), |(c, s), a| {
            (c + a.weight * a.angle.cos(), s + a.weight * a.angle.sin())
        });
        if c.hypot(s) > 1e-8 * per.max(1.0) {
            return Err(GeomError::BadPolygon(format!(
                "sides do not close: residual ({c:e}, {s:e})"
            )));
        }
        Ok(Self::from_atoms_unchecked(atoms))
    }

    /// Atoms are assumed nonnegative and closed; they are sorted by angle.
    pub fn from_atoms_unchecked(mut atoms: Vec<Atom>) -> Self {
        for a in atoms.iter_mut() {
            a.angle = wrap_angle(a.angle);
        }
        atoms.sort_by(|x, y| x.angle.partial_cmp(&y.angle).unwrap());
        Self {
            atoms,
            offset: [0.0, 0.0],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn normals(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.angle).collect()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn offset(&self) -> Point {
        self.offset
    }

    pub fn with_offset(mut self, offset: Point) -> Self {
        self.offset = offset;
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        atoms_eval(&self.atoms, t) + self.offset[0] * t.cos() + self.offset[1] * t.sin()
    }

    pub fn deriv(&self, t: f64) -> f64 {
        atoms_deriv(&self.atoms, t) - self.offset[0] * t.sin() + self.offset[1] * t.cos()
    }

    /// Vertex between consecutive normals, as angles of the outer-normal
    /// bisector and the vertex point.
    pub fn vertices(&self) -> Vec<(f64, Point)> {
        let n = self.atoms.len();
        (0..n)
            .map(|k| {
                let a = self.atoms[k].angle;
                let b = if k + 1 < n {
                    self.atoms[k + 1].angle
                } else {
                    self.atoms[0].angle + TAU
                };
                let mid = 0.5 * (a + b);
                (wrap_angle(mid), contact_point(self.eval(mid), self.deriv(mid), mid))
            })
            .collect()
    }
}

fn contact_point(h: f64, dh: f64, t: f64) -> Point {
    let (s, c) = t.sin_cos();
    [h * c - dh * s, h * s + dh * c]
}

/// Shape representations.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportFn {
    /// `Σ_α`: the segment from `-(π/2) i e^{iα}` to `(π/2) i e^{iα}`,
    /// `h = (π/2)|sin(θ - α)|`.
    Segment { alpha: f64 },
    Polygon(Polygon),
    /// Triangle of class 𝒜 in closed piecewise form.
    Triangle(TriangleSpec),
    Fourier(FourierSeries),
    Grid(GridSamples),
}

/// Global extrema of `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
    pub argmax: f64,
}

impl SupportFn {
    pub fn segment(alpha: f64) -> Self {
        SupportFn::Segment {
            alpha: wrap_angle(alpha),
        }
    }

    pub fn disc() -> Self {
        SupportFn::Fourier(FourierSeries::constant(1.0))
    }

    pub fn fourier(c0: f64, terms: impl IntoIterator<Item = (u32, f64, f64)>) -> Self {
        SupportFn::Fourier(FourierSeries::new(c0, terms))
    }

    /// Wraps a polygon, recognising the needle `Σ_α` (two antipodal sides of
    /// length π about the origin).
    pub fn from_polygon(p: Polygon) -> Self {
        if p.atoms.len() == 2 && p.offset == [0.0, 0.0] {
            let [a, b] = [p.atoms[0], p.atoms[1]];
            if (b.angle - a.angle - PI).abs() < 1e-12
                && (a.weight - PI).abs() < 1e-12
                && (b.weight - PI).abs() < 1e-12
            {
                return SupportFn::segment(a.angle);
            }
        }
        SupportFn::Polygon(p)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            SupportFn::Segment { alpha } => FRAC_PI_2 * (theta - alpha).sin().abs(),
            SupportFn::Polygon(p) => p.eval(theta),
            SupportFn::Triangle(t) => t.eval(theta),
            SupportFn::Fourier(f) => f.eval(theta),
            SupportFn::Grid(g) => g.eval(theta),
        }
    }

    /// `h'(θ)`: exact right derivative for closed forms, differenced for grids.
    pub fn deriv(&self, theta: f64) -> f64 {
        match self {
            SupportFn::Segment { alpha } => {
                let x = wrap_angle(theta - alpha);
                let sign = if x < PI { 1.0 } else { -1.0 };
                sign * FRAC_PI_2 * x.cos()
            }
            SupportFn::Polygon(p) => p.deriv(theta),
            SupportFn::Triangle(t) => t.deriv(theta),
            SupportFn::Fourier(f) => f.deriv(theta),
            SupportFn::Grid(g) => g.deriv(theta),
        }
    }

    /// Curvature atoms for needles, polygons and triangles.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match self {
            SupportFn::Segment { alpha } => {
                Some(vec![Atom::new(*alpha, PI), Atom::new(alpha + PI, PI)])
            }
            SupportFn::Polygon(p) => Some(p.atoms.clone()),
            SupportFn::Triangle(t) => Some(t.atoms()),
            _ => None,
        }
    }

    /// Angles where `h` fails to be smooth (all nodes for grid forms).
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            SupportFn::Fourier(_) => Vec::new(),
            SupportFn::Grid(g) => g.grid.nodes().collect(),
            other => other
                .atoms()
                .unwrap_or_default()
                .iter()
                .map(|a| a.angle)
                .collect(),
        }
    }

    /// Sample count for grid forms, 0 for closed forms.
    pub fn grid_len(&self) -> usize {
        match self {
            SupportFn::Grid(g) => g.grid.len(),
            _ => 0,
        }
    }

    /// Quadrature rule adapted to the kinks of `self` and `others`.
    pub fn rule_with(&self, others: &[&SupportFn]) -> Rule {
        let mut breaks = self.kinks();
        for o in others {
            breaks.extend(o.kinks());
        }
        periodic_rule(&breaks, PANEL_LEN, 8)
    }

    /// `P = ∫ h dθ`.
    pub fn perimeter(&self) -> f64 {
        match self {
            SupportFn::Segment { .. } => TAU,
            SupportFn::Polygon(p) => p.atoms.iter().map(|a| a.weight).sum(),
            SupportFn::Triangle(_) => TAU,
            SupportFn::Fourier(f) => TAU * f.c0,
            SupportFn::Grid(g) => trapezoid(&g.samples),
        }
    }

    /// Steiner point `(1/π) ∫ h (cos θ, sin θ) dθ`.
    pub fn steiner(&self) -> Point {
        match self {
            SupportFn::Segment { .. } | SupportFn::Triangle(_) => [0.0, 0.0],
            SupportFn::Polygon(p) => p.offset,
            SupportFn::Fourier(f) => {
                let (a, b) = f.first_harmonic();
                [a, b]
            }
            SupportFn::Grid(g) => {
                let dt = g.grid.spacing();
                let (mut c, mut s) = (0.0, 0.0);
                for (t, v) in g.grid.nodes().zip(&g.samples) {
                    c += v * t.cos();
                    s += v * t.sin();
                }
                [c * dt / PI, s * dt / PI]
            }
        }
    }

    /// Map into class 𝒜: `h̃ = (2π/P)(h - s·(cos θ, sin θ))`.
    pub fn normalize_to_class_a(&self) -> Result<SupportFn> {
        let per = self.perimeter();
        if !(per > 1e-12) {
            return Err(GeomError::DegeneratePerimeter(per));
        }
        let k = TAU / per;
        let s = self.steiner();
        Ok(match self {
            SupportFn::Segment { .. } | SupportFn::Triangle(_) => self.clone(),
            SupportFn::Polygon(p) => SupportFn::from_polygon(Polygon::from_atoms_unchecked(
                p.atoms
                    .iter()
                    .map(|a| Atom::new(a.angle, a.weight * k))
                    .collect(),
            )),
            SupportFn::Fourier(f) => SupportFn::Fourier(FourierSeries::new(
                f.c0 * k,
                f.terms
                    .iter()
                    .filter(|t| t.k != 1)
                    .map(|t| (t.k, t.a * k, t.b * k)),
            )),
            SupportFn::Grid(g) => SupportFn::Grid(GridSamples {
                grid: g.grid,
                samples: g
                    .grid
                    .nodes()
                    .zip(&g.samples)
                    .map(|(t, v)| k * (v - s[0] * t.cos() - s[1] * t.sin()))
                    .collect(),
            }),
        })
    }

    /// Class-𝒜 residuals `(P - 2π, |s|)`.
    pub fn class_a_residuals(&self) -> (f64, f64) {
        let s = self.steiner();
        (self.perimeter() - TAU, s[0].hypot(s[1]))
    }

    /// Translate the body by `v`.
    pub fn translated(&self, v: Point) -> SupportFn {
        match self {
            SupportFn::Fourier(f) => SupportFn::Fourier(FourierSeries::new(
                f.c0,
                f.terms
                    .iter()
                    .map(|t| (t.k, t.a, t.b))
                    .chain([(1, v[0], v[1])]),
            )),
            SupportFn::Grid(g) => SupportFn::Grid(GridSamples {
                grid: g.grid,
                samples: g
                    .grid
                    .nodes()
                    .zip(&g.samples)
                    .map(|(t, h)| h + v[0] * t.cos() + v[1] * t.sin())
                    .collect(),
            }),
            SupportFn::Polygon(p) => {
                let o = p.offset;
                SupportFn::Polygon(p.clone().with_offset([o[0] + v[0], o[1] + v[1]]))
            }
            other => {
                let atoms = other.atoms().expect("atomic form");
                SupportFn::Polygon(Polygon::from_atoms_unchecked(atoms).with_offset(v))
            }
        }
    }

    /// Rotate the body by `phi` about the origin: `h(θ - φ)`.
    pub fn rotated(&self, phi: f64) -> SupportFn {
        match self {
            SupportFn::Segment { alpha } => SupportFn::segment(alpha + phi),
            SupportFn::Triangle(t) => SupportFn::Triangle(t.rotated(phi)),
            SupportFn::Polygon(p) => {
                let (s, c) = phi.sin_cos();
                let o = p.offset;
                SupportFn::Polygon(
                    Polygon::from_atoms_unchecked(
                        p.atoms
                            .iter()
                            .map(|a| Atom::new(a.angle + phi, a.weight))
                            .collect(),
                    )
                    .with_offset([c * o[0] - s * o[1], s * o[0] + c * o[1]]),
                )
            }
            SupportFn::Fourier(f) => SupportFn::Fourier(f.rotated(phi)),
            SupportFn::Grid(g) => SupportFn::Grid(GridSamples::from_fn(g.grid, |t| g.eval(t - phi))),
        }
    }

    /// Sample onto a grid.
    pub fn to_grid(&self, grid: AngleGrid) -> GridSamples {
        GridSamples::from_fn(grid, |t| self.eval(t))
    }

    /// Minkowski combination `a·K + b·L` (`a, b ≥ 0`).
    pub fn minkowski(a: f64, k: &SupportFn, b: f64, l: &SupportFn) -> SupportFn {
        match (k, l) {
            (SupportFn::Fourier(f), SupportFn::Fourier(g)) => SupportFn::Fourier(FourierSeries::new(
                a * f.c0 + b * g.c0,
                f.terms
                    .iter()
                    .map(|t| (t.k, a * t.a, a * t.b))
                    .chain(g.terms.iter().map(|t| (t.k, b * t.a, b * t.b))),
            )),
            _ => match (k.atoms(), l.atoms()) {
                (Some(ka), Some(la)) => {
                    let mut atoms: Vec<Atom> = ka
                        .iter()
                        .map(|x| Atom::new(x.angle, a * x.weight))
                        .chain(la.iter().map(|x| Atom::new(x.angle, b * x.weight)))
                        .collect();
                    atoms.sort_by(|x, y| x.angle.partial_cmp(&y.angle).unwrap());
                    atoms.dedup_by(|x, y| {
                        if (x.angle - y.angle).abs() < 1e-14 {
                            y.weight += x.weight;
                            true
                        } else {
                            false
                        }
                    });
                    let sk = k.steiner();
                    let sl = l.steiner();
                    SupportFn::Polygon(
                        Polygon::from_atoms_unchecked(atoms)
                            .with_offset([a * sk[0] + b * sl[0], a * sk[1] + b * sl[1]]),
                    )
                }
                _ => {
                    let n = k.grid_len().max(l.grid_len()).max(DEFAULT_GRID);
                    let grid = AngleGrid::new(n).expect("even grid");
                    SupportFn::Grid(GridSamples::from_fn(grid, |t| a * k.eval(t) + b * l.eval(t)))
                }
            },
        }
    }

    /// Check `h'' + h ≥ -tol`. Grid forms use the tolerance `10⁻⁶ n / 2π`,
    /// since the second difference of a kink grows like `1/Δθ`.
    pub fn check_convex(&self) -> Result<()> {
        match self {
            SupportFn::Segment { .. } | SupportFn::Triangle(_) => Ok(()),
            SupportFn::Polygon(p) => match p.atoms.iter().find(|a| !(a.weight > 0.0)) {
                Some(a) => Err(GeomError::NotConvex {
                    angle: a.angle,
                    value: a.weight,
                    tol: 0.0,
                }),
                None => Ok(()),
            },
            SupportFn::Fourier(f) => {
                let n = (SCAN_NODES as u32).max(16 * f.max_k()) as usize;
                (0..n)
                    .map(|i| TAU * i as f64 / n as f64)
                    .map(|t| (t, f.curvature(t)))
                    .find(|(_, r)| *r < -CONVEX_TOL)
                    .map_or(Ok(()), |(angle, value)| {
                        Err(GeomError::NotConvex {
                            angle,
                            value,
                            tol: CONVEX_TOL,
                        })
                    })
            }
            SupportFn::Grid(g) => {
                let tol = grid_convex_tol(g.grid);
                g.discrete_curvature()
                    .samples
                    .iter()
                    .zip(g.grid.nodes())
                    .find(|(r, _)| **r < -tol)
                    .map_or(Ok(()), |(value, angle)| {
                        Err(GeomError::NotConvex {
                            angle,
                            value: *value,
                            tol,
                        })
                    })
            }
        }
    }

    /// Global minimum and maximum of `h` with their (smallest) angles.
    pub fn min_max(&self) -> MinMax {
        if let SupportFn::Segment { alpha } = self {
            let argmin = if *alpha >= PI { alpha - PI } else { *alpha };
            return MinMax {
                min: 0.0,
                max: FRAC_PI_2,
                argmin,
                argmax: wrap_axis_first(alpha + FRAC_PI_2),
            };
        }
        let mut extra = self.kinks();
        if let SupportFn::Polygon(p) = self {
            extra.extend(p.vertices().into_iter().map(|(t, v)| {
                let _ = t;
                v[1].atan2(v[0])
            }));
        }
        let n = SCAN_NODES.max(2 * self.grid_len());
        let maxima = local_maxima(|t| self.eval(t), n, &extra, 16);
        let minima = local_maxima(|t| -self.eval(t), n, &extra, 16);
        let (argmax, max) = pick_smallest_angle(&maxima);
        let (argmin, negmin) = pick_smallest_angle(&minima);
        MinMax {
            min: -negmin,
            max,
            argmin,
            argmax,
        }
    }

    /// Local maxima of `h` within `tol` of the global maximum, smallest angle first.
    pub fn near_maxima(&self, tol: f64) -> Vec<(f64, f64)> {
        let n = SCAN_NODES.max(2 * self.grid_len());
        let maxima = local_maxima(|t| self.eval(t), n, &self.kinks(), 64);
        let best = maxima.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
        let mut out: Vec<(f64, f64)> = maxima.into_iter().filter(|m| m.1 >= best - tol).collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    /// Boundary point `h u + h' u⊥` for each grid node. Needles report their
    /// endpoints (right derivative at the kinks).
    pub fn boundary_points(&self, grid: AngleGrid) -> Vec<Point> {
        grid.nodes()
            .map(|t| contact_point(self.eval(t), self.deriv(t), t))
            .collect()
    }

    /// `(∫ h², ∫ h'²)`.
    pub fn energies(&self) -> (f64, f64) {
        match self {
            SupportFn::Grid(g) => {
                let h2: Vec<f64> = g.samples.iter().map(|v| v * v).collect();
                let d2: Vec<f64> = (0..g.samples.len()).map(|i| g.node_deriv(i).powi(2)).collect();
                (trapezoid(&h2), trapezoid(&d2))
            }
            SupportFn::Fourier(f) => {
                let dh = f
                    .terms
                    .iter()
                    .map(|t| (t.k as f64).powi(2) * (t.a * t.a + t.b * t.b))
                    .sum::<f64>()
                    * PI;
                (f.norm_sq(), dh)
            }
            _ => {
                let rule = self.rule_with(&[]);
                (
                    rule.integrate(|t| self.eval(t).powi(2)),
                    rule.integrate(|t| self.deriv(t).powi(2)),
                )
            }
        }
    }
}

fn wrap_axis_first(t: f64) -> f64 {
    let x = wrap_angle(t);
    if x >= PI {
        x - PI
    } else {
        x
    }
}

pub fn grid_convex_tol(grid: AngleGrid) -> f64 {
    1e-6 / grid.spacing()
}

/// Refined local maxima of `f` over the circle, best `keep` of them.
///
/// Scans `n` uniform nodes plus `extra` angles, then refines every discrete
/// local maximum by golden section inside its neighbouring bracket.
pub(crate) fn local_maxima(
    f: impl Fn(f64) -> f64,
    n: usize,
    extra: &[f64],
    keep: usize,
) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    pts.extend(extra.iter().map(|t| wrap_angle(*t)));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let vals: Vec<f64> = pts.iter().map(|t| f(*t)).collect();
    let m = pts.len();
    let mut cands: Vec<usize> = (0..m)
        .filter(|&i| {
            let prev = vals[(i + m - 1) % m];
            let next = vals[(i + 1) % m];
            vals[i] >= prev && vals[i] >= next
        })
        .collect();
    cands.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));
    cands.truncate(keep);
    cands
        .into_iter()
        .map(|i| {
            let lo = if i == 0 { pts[m - 1] - TAU } else { pts[i - 1] };
            let hi = if i + 1 == m { pts[0] + TAU } else { pts[i + 1] };
            let (t, v) = golden_max(&f, lo, hi, 1e-10);
            if v > vals[i] {
                (wrap_angle(t), v)
            } else {
                (pts[i], vals[i])
            }
        })
        .collect()
}

/// Best value, ties within [`TIE_TOL`] resolved by the smallest angle.
pub(crate) fn pick_smallest_angle(cands: &[(f64, f64)]) -> (f64, f64) {
    let best = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    cands
        .iter()
        .filter(|c| c.1 >= best - TIE_TOL)
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .map(|c| (c.0, best))
        .unwrap_or((0.0, best))
}

/// `d_H(K, L) = sup_θ |h_K - h_L|`.
pub fn hausdorff_distance(a: &SupportFn, b: &SupportFn) -> f64 {
    let n = SCAN_NODES.max(a.grid_len()).max(b.grid_len());
    let mut extra = a.kinks();
    extra.extend(b.kinks());
    let maxima = local_maxima(|t| (a.eval(t) - b.eval(t)).abs(), n, &extra, 5);
    maxima.iter().map(|m| m.1).fold(0.0, f64::max)
}

/// `d₂(K, L) = (∫ (h_K - h_L)²)^{1/2}`.
pub fn l2_distance(a: &SupportFn, b: &SupportFn) -> f64 {
    if let (SupportFn::Fourier(f), SupportFn::Fourier(g)) = (a, b) {
        return f.sub(g).norm_sq().max(0.0).sqrt();
    }
    let rule = a.rule_with(&[b]);
    rule.integrate(|t| (a.eval(t) - b.eval(t)).powi(2)).sqrt()
}

/// `∫ h_K h_L`.
pub fn inner_product(a: &SupportFn, b: &SupportFn) -> f64 {
    a.rule_with(&[b]).integrate(|t| a.eval(t) * b.eval(t))
}
