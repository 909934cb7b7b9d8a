//! Quadratic functionals `J(K) = ∫ a h² + b h'² + c h + d h'` on class 𝒜.
//!
//! With `a, b ≥ 0` the functional is convex in `h`, so its maximum over the
//! (convex) class is attained at an extreme point: a needle or a triangle.
//! Two independent solvers witness this:
//!
//! * [`maximize_over_cone`] discretizes the curvature measure on a grid,
//!   `h = Σ w_i κ G₀(θ_i − ·)`, turning `J` into `wᵀMw + qᵀw` over the
//!   polytope `{w ≥ 0, Σ w = 2π, Σ w cos θ_i = Σ w sin θ_i = 0}`, and walks
//!   its vertices (at most three nonzero weights);
//! * [`maximize_over_triangles`] optimizes the three normal angles of a
//!   triangle directly and compares with the best needle.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use log::{debug, warn};
use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::grid::{axis_distance, circular_distance, wrap_angle, wrap_axis, wrap_signed, AngleGrid};
use crate::measure::Atom;
use crate::optimize::{golden_max, nelder_mead, NelderMead};
use crate::quadrature::{interval_rule, periodic_rule, Rule};
use crate::random::rng;
use crate::support::{FourierSeries, Polygon, SupportFn};
use crate::weingarten::{kernel_unscaled, kernel_unscaled_deriv, TriangleSpec, KERNEL_SCALE};

/// Panel length for `J` quadrature (Gauss-Legendre order 8 per panel).
pub const J_PANEL: f64 = TAU / 32.0;

/// Vertices whose 3×3 moment system is worse conditioned are skipped.
pub const MAX_VERTEX_COND: f64 = 1e8;

/// Minimum improvement accepted by the vertex walk.
pub const ASCENT_TOL: f64 = 1e-12;

/// Atoms closer than this many grid steps are merged before classification.
pub const MERGE_STEPS: f64 = 2.0;

/// Weight tolerance for recognising a needle.
pub const SEGMENT_WEIGHT_TOL: f64 = 1e-6;

/// Margin below which the triangle search is pushed back from the boundary.
pub const REPULSION_MARGIN: f64 = 1e-3;

/// A bump `inside` on `|θ − center| < width` (circularly).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub inside: f64,
    pub outside: f64,
}

/// One coefficient function of `J`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffFn {
    Const(f64),
    /// Uniform samples over one period, interpolated linearly.
    Grid(Vec<f64>),
    /// Piecewise constant: the first bump containing `θ` decides; outside
    /// all bumps the first bump's `outside` value applies.
    Bumps(Vec<Bump>),
    Fourier(FourierSeries),
}

impl CoeffFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoeffFn::Const(v) => *v,
            CoeffFn::Grid(s) => {
                let n = s.len();
                let x = wrap_angle(t) / (TAU / n as f64);
                let i = x.floor();
                let f = x - i;
                let i = i as usize % n;
                s[i] * (1.0 - f) + s[(i + 1) % n] * f
            }
            CoeffFn::Bumps(bumps) => bumps
                .iter()
                .find(|b| circular_distance(t, b.center) < b.width)
                .map(|b| b.inside)
                .unwrap_or_else(|| bumps.first().map_or(0.0, |b| b.outside)),
            CoeffFn::Fourier(f) => f.eval(t),
        }
    }

    /// Angles where the function is not smooth.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            CoeffFn::Const(_) | CoeffFn::Fourier(_) => Vec::new(),
            CoeffFn::Grid(s) => (0..s.len()).map(|i| TAU * i as f64 / s.len() as f64).collect(),
            CoeffFn::Bumps(b) => b
                .iter()
                .flat_map(|b| [b.center - b.width, b.center + b.width])
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoeffFn::Const(v) => *v == 0.0,
            CoeffFn::Grid(s) => s.iter().all(|v| *v == 0.0),
            CoeffFn::Bumps(b) => b.iter().all(|b| b.inside == 0.0 && b.outside == 0.0),
            CoeffFn::Fourier(f) => f.c0 == 0.0 && f.terms.iter().all(|t| t.a == 0.0 && t.b == 0.0),
        }
    }

    /// Minimum over a dense scan plus the break points.
    fn scan_min(&self) -> (f64, f64) {
        scan_points(&self.breaks())
            .map(|t| (t, self.eval(t)))
            .fold((0.0, f64::INFINITY), |m, p| if p.1 < m.1 { p } else { m })
    }
}

const COEFF_SCAN: usize = 4096;

fn scan_points(breaks: &[f64]) -> impl Iterator<Item = f64> + '_ {
    (0..COEFF_SCAN)
        .map(|i| TAU * i as f64 / COEFF_SCAN as f64)
        .chain(breaks.iter().flat_map(|b| [wrap_angle(*b - 1e-12), wrap_angle(*b + 1e-12)]))
}

/// Coefficients `(a, b, c, d)` of `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadCoeffs {
    pub a: CoeffFn,
    pub b: CoeffFn,
    pub c: CoeffFn,
    pub d: CoeffFn,
}

impl QuadCoeffs {
    /// Validates `a, b ≥ 0` and that `a + b` vanishes only on a negligible set.
    pub fn new(a: CoeffFn, b: CoeffFn, c: CoeffFn, d: CoeffFn) -> Result<Self> {
        let q = Self { a, b, c, d };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("a", &self.a), ("b", &self.b)] {
            let (t, v) = f.scan_min();
            if v < 0.0 {
                return Err(GeomError::InvalidCoeffs(format!(
                    "{name} must be nonnegative, found {name}({t}) = {v}"
                )));
            }
        }
        let degenerate = (0..COEFF_SCAN)
            .map(|i| TAU * i as f64 / COEFF_SCAN as f64)
            .filter(|&t| self.a.eval(t) + self.b.eval(t) <= 1e-12)
            .count();
        let fraction = degenerate as f64 / COEFF_SCAN as f64;
        if fraction >= 1e-3 {
            return Err(GeomError::InvalidCoeffs(format!(
                "a + b vanishes on {:.3}% of the circle",
                100.0 * fraction
            )));
        }
        for (name, f) in [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)] {
            let finite = match f {
                CoeffFn::Grid(s) => !s.is_empty() && s.iter().all(|v| v.is_finite()),
                _ => scan_points(&f.breaks()).take(64).all(|t| f.eval(t).is_finite()),
            };
            if !finite {
                return Err(GeomError::InvalidCoeffs(format!("{name} is empty or not finite")));
            }
        }
        Ok(())
    }

    fn breaks(&self) -> Vec<f64> {
        let mut b = self.a.breaks();
        b.extend(self.b.breaks());
        b.extend(self.c.breaks());
        b.extend(self.d.breaks());
        b
    }

    /// `J = ∫ h²` (with `b = c = d = 0`).
    pub fn l2_energy() -> Self {
        Self {
            a: CoeffFn::Const(1.0),
            b: CoeffFn::Const(0.0),
            c: CoeffFn::Const(0.0),
            d: CoeffFn::Const(0.0),
        }
    }

    /// `J = ∫ h'²`.
    pub fn derivative_energy() -> Self {
        Self {
            a: CoeffFn::Const(0.0),
            b: CoeffFn::Const(1.0),
            c: CoeffFn::Const(0.0),
            d: CoeffFn::Const(0.0),
        }
    }

    /// `b = 1` on `ε`-neighbourhoods of `{0, 2π/3, 4π/3}` and `10⁻³`
    /// elsewhere; `a = c = d = 0`.
    pub fn three_bumps(eps: f64) -> Self {
        let bumps = (0..3)
            .map(|k| Bump {
                center: TAU * k as f64 / 3.0,
                width: eps,
                inside: 1.0,
                outside: 1e-3,
            })
            .collect();
        Self {
            a: CoeffFn::Const(0.0),
            b: CoeffFn::Bumps(bumps),
            c: CoeffFn::Const(0.0),
            d: CoeffFn::Const(0.0),
        }
    }

    /// `J(K) = ∫ h_K² − 2 h_K h_C = d₂(K, C)² − ∫ h_C²`.
    pub fn distance_to(target: &SupportFn) -> Self {
        let c = match target {
            SupportFn::Fourier(f) => CoeffFn::Fourier(f.scaled(-2.0)),
            other => {
                let n = 2048.max(other.grid_len());
                CoeffFn::Grid(
                    (0..n)
                        .map(|i| -2.0 * other.eval(TAU * i as f64 / n as f64))
                        .collect(),
                )
            }
        };
        Self {
            a: CoeffFn::Const(1.0),
            b: CoeffFn::Const(0.0),
            c,
            d: CoeffFn::Const(0.0),
        }
    }

    /// Random valid coefficients: positive smooth `a`, `b` and signed `c`,
    /// `d`. Roughly half of the draws carry a strong third harmonic in `c`,
    /// which favours triangles over needles.
    pub fn random(rng: &mut impl Rng) -> Self {
        let triangular = rng.gen_bool(0.5);
        let scale = if triangular { 0.2 } else { 1.0 };
        let positive = |rng: &mut dyn rand::RngCore| -> CoeffFn {
            let c0 = scale * rng.gen_range(0.2..1.5);
            if rng.gen_bool(0.3) {
                return CoeffFn::Const(c0);
            }
            let terms: Vec<(u32, f64, f64)> = (2..=3)
                .map(|k| (k, rng.gen_range(-0.2..0.2) * c0, rng.gen_range(-0.2..0.2) * c0))
                .collect();
            CoeffFn::Fourier(FourierSeries::new(c0, terms))
        };
        let a = positive(rng);
        let b = positive(rng);
        let signed = |rng: &mut dyn rand::RngCore, boost: f64| -> CoeffFn {
            let mut terms: Vec<(u32, f64, f64)> = (1..=3)
                .map(|k| (k, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
                .collect();
            let phase = rng.gen_range(0.0..TAU);
            terms.push((3, boost * phase.cos(), boost * phase.sin()));
            CoeffFn::Fourier(FourierSeries::new(rng.gen_range(-1.0..1.0), terms))
        };
        let boost = if triangular { rng.gen_range(1.0..4.0) } else { 0.0 };
        let c = signed(rng, boost);
        let d = signed(rng, 0.0);
        Self { a, b, c, d }
    }
}

/// `(h, h')` of an atomic shape with a single `sin_cos` per atom.
fn atoms_pair(atoms: &[Atom], theta: f64) -> (f64, f64) {
    let (mut h, mut dh) = (0.0, 0.0);
    for at in atoms {
        let s = wrap_signed(at.angle - theta);
        let x = s.abs();
        let (sn, cs) = x.sin_cos();
        let g = (1.0 - x / PI) * sn;
        let dg = cs - sn / PI - x / PI * cs;
        h += at.weight * g;
        dh -= at.weight * if s > 0.0 { dg } else { -dg };
    }
    (KERNEL_SCALE * h, KERNEL_SCALE * dh)
}

fn shape_pair(h: &SupportFn, atoms: &Option<Vec<Atom>>, t: f64) -> (f64, f64) {
    match (atoms, h) {
        (Some(a), SupportFn::Segment { .. } | SupportFn::Triangle(_)) => atoms_pair(a, t),
        (_, SupportFn::Fourier(f)) => f.eval_pair(t),
        _ => (h.eval(t), h.deriv(t)),
    }
}

fn j_rule(coeffs: &QuadCoeffs, h: &SupportFn) -> Rule {
    let mut breaks = h.kinks();
    breaks.extend(coeffs.breaks());
    periodic_rule(&breaks, J_PANEL, 8)
}

/// `J(h)`, integrating piecewise between the kinks of `h` and the
/// coefficients (so `h'` jumps never fall inside a panel).
pub fn eval_j(coeffs: &QuadCoeffs, h: &SupportFn) -> f64 {
    let atoms = h.atoms();
    let [za, zb, zc, zd] = [&coeffs.a, &coeffs.b, &coeffs.c, &coeffs.d].map(CoeffFn::is_zero);
    j_rule(coeffs, h).integrate(|t| {
        let (v, dv) = shape_pair(h, &atoms, t);
        let mut acc = 0.0;
        if !za {
            acc += coeffs.a.eval(t) * v * v;
        }
        if !zb {
            acc += coeffs.b.eval(t) * dv * dv;
        }
        if !zc {
            acc += coeffs.c.eval(t) * v;
        }
        if !zd {
            acc += coeffs.d.eval(t) * dv;
        }
        acc
    })
}

/// Shape class of a maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Segment,
    Triangle,
    Other,
}

/// Result of the cone solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSolution {
    /// Merged atoms, sorted by angle.
    pub atoms: Vec<Atom>,
    /// `wᵀMw + qᵀw` at the best vertex.
    pub value: f64,
    pub classification: Classification,
    pub h_opt: SupportFn,
    /// Vertex moves summed over all restarts.
    pub iterations: usize,
    pub grid: usize,
}

/// `J` restricted to measures supported on the grid nodes.
#[derive(Debug, Clone)]
pub struct ConeProblem {
    grid: AngleGrid,
    m: DMatrix<f64>,
    q: Vec<f64>,
}

impl ConeProblem {
    /// Assemble `M = Φᵀ diag(a w) Φ + Φ'ᵀ diag(b w) Φ'` and
    /// `q = Φᵀ (c w) + Φ'ᵀ (d w)` on Gauss-Legendre nodes between grid nodes
    /// and coefficient breaks.
    pub fn new(coeffs: &QuadCoeffs, n: usize) -> Result<Self> {
        if n < 64 || !n.is_multiple_of(2) {
            return Err(GeomError::BadGrid(n));
        }
        let grid = AngleGrid::new(n)?;
        let mut breaks: Vec<f64> = grid.nodes().collect();
        breaks.extend(coeffs.breaks());
        let rule = periodic_rule(&breaks, grid.spacing(), 4);
        let nq = rule.len();
        let mut phi = DMatrix::<f64>::zeros(nq, n);
        let mut dphi = DMatrix::<f64>::zeros(nq, n);
        let mut q = vec![0.0; n];
        for (r, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let (ca, cb) = (coeffs.a.eval(t), coeffs.b.eval(t));
            let (cc, cd) = (coeffs.c.eval(t), coeffs.d.eval(t));
            let (sa, sb) = ((ca * w).sqrt(), (cb * w).sqrt());
            for i in 0..n {
                let s = grid.node(i) - t;
                let g = KERNEL_SCALE * kernel_unscaled(s);
                let dg = -KERNEL_SCALE * kernel_unscaled_deriv(s);
                phi[(r, i)] = sa * g;
                dphi[(r, i)] = sb * dg;
                q[i] += w * (cc * g + cd * dg);
            }
        }
        let m = phi.tr_mul(&phi) + dphi.tr_mul(&dphi);
        let min_diag = m.diagonal().min();
        if min_diag < -1e-9 {
            return Err(GeomError::NonPsd(min_diag));
        }
        Ok(Self { grid, m, q })
    }

    pub fn grid(&self) -> AngleGrid {
        self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn linear(&self) -> &[f64] {
        &self.q
    }

    /// `wᵀMw + qᵀw` for a full weight vector.
    pub fn value(&self, w: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(w);
        (v.transpose() * &self.m * &v)[(0, 0)] + self.q.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
    }

    fn vertex_value(&self, idx: &[usize; 3], w: &[f64; 3]) -> f64 {
        let mut v = 0.0;
        for a in 0..3 {
            v += self.q[idx[a]] * w[a];
            for b in 0..3 {
                v += w[a] * w[b] * self.m[(idx[a], idx[b])];
            }
        }
        v
    }

    /// Weights of the vertex supported on `idx`, if feasible and well conditioned.
    pub fn vertex_weights(&self, idx: &[usize; 3]) -> Option<[f64; 3]> {
        if idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2] {
            return None;
        }
        let t = idx.map(|i| self.grid.node(i));
        let a = Matrix3::new(
            1.0,
            1.0,
            1.0,
            t[0].cos(),
            t[1].cos(),
            t[2].cos(),
            t[0].sin(),
            t[1].sin(),
            t[2].sin(),
        );
        let inv = a.try_inverse()?;
        if a.norm() * inv.norm() > MAX_VERTEX_COND {
            return None;
        }
        let w = inv * Vector3::new(TAU, 0.0, 0.0);
        if w.iter().any(|x| *x < -1e-10) {
            return None;
        }
        Some([w[0].max(0.0), w[1].max(0.0), w[2].max(0.0)])
    }

    fn random_vertex(&self, rng: &mut impl Rng) -> Result<([usize; 3], [f64; 3])> {
        let n = self.grid.len();
        for _ in 0..100 {
            let idx = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
            if let Some(w) = self.vertex_weights(&idx) {
                return Ok((idx, w));
            }
        }
        Err(GeomError::Infeasible(100))
    }

    /// Steepest vertex ascent from a random start.
    fn ascend(&self, seed: u64) -> Result<([usize; 3], [f64; 3], f64, usize)> {
        let mut rng = rng(seed);
        let n = self.grid.len();
        let reach = (n / 8) as isize;
        let (mut idx, mut w) = self.random_vertex(&mut rng)?;
        let mut val = self.vertex_value(&idx, &w);
        let mut moves = 0;
        loop {
            let mut cands: Vec<(usize, usize)> = Vec::with_capacity(3 * (2 * reach as usize + 8));
            for (p, &i) in idx.iter().enumerate() {
                for off in (-reach..=reach).filter(|o| *o != 0) {
                    cands.push((p, (i as isize + off).rem_euclid(n as isize) as usize));
                }
            }
            for _ in 0..8 {
                cands.push((rng.gen_range(0..3), rng.gen_range(0..n)));
            }
            let mut best: Option<([usize; 3], [f64; 3], f64)> = None;
            // a needle is a degenerate vertex; slide it as a whole
            if let Some(z) = (0..3).find(|&p| w[p] <= 1e-12) {
                let (p, r) = ((z + 1) % 3, (z + 2) % 3);
                for off in (-reach..=reach).filter(|o| *o != 0) {
                    let mut cand = idx;
                    cand[p] = (idx[p] as isize + off).rem_euclid(n as isize) as usize;
                    cand[r] = (idx[r] as isize + off).rem_euclid(n as isize) as usize;
                    if let Some(cw) = self.vertex_weights(&cand) {
                        let v = self.vertex_value(&cand, &cw);
                        if v > val + ASCENT_TOL && best.as_ref().is_none_or(|b| v > b.2) {
                            best = Some((cand, cw, v));
                        }
                    }
                }
            }
            for (p, j) in cands {
                let mut cand = idx;
                cand[p] = j;
                if let Some(cw) = self.vertex_weights(&cand) {
                    let v = self.vertex_value(&cand, &cw);
                    if v > val + ASCENT_TOL && best.as_ref().is_none_or(|b| v > b.2) {
                        best = Some((cand, cw, v));
                    }
                }
            }
            match best {
                Some((ci, cw, v)) => {
                    idx = ci;
                    w = cw;
                    val = v;
                    moves += 1;
                }
                None => return Ok((idx, w, val, moves)),
            }
        }
    }
}

/// Maximize `J` over the discretized cone by multistart vertex ascent.
///
/// Restart `r` uses seed `seed + r`; the best value wins, ties going to the
/// smaller leading atom angle.
pub fn maximize_over_cone(coeffs: &QuadCoeffs, n: usize, restarts: usize, seed: u64) -> Result<ConeSolution> {
    coeffs.validate()?;
    let problem = ConeProblem::new(coeffs, n)?;
    solve_cone(&problem, restarts, seed)
}

/// One ascent run: atom indices, weights, value and move count.
type Run = ([usize; 3], [f64; 3], f64, usize);

/// Vertex ascent on a pre-assembled problem.
pub fn solve_cone(problem: &ConeProblem, restarts: usize, seed: u64) -> Result<ConeSolution> {
    let runs: Vec<Result<Run>> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| problem.ascend(seed.wrapping_add(r)))
        .collect();
    let mut best: Option<([usize; 3], [f64; 3], f64)> = None;
    let mut iterations = 0;
    for run in runs {
        let (idx, w, v, moves) = run?;
        iterations += moves;
        let better = match &best {
            None => true,
            Some(b) => v > b.2 + ASCENT_TOL || ((v - b.2).abs() <= ASCENT_TOL && lead(&idx, &w) < lead(&b.0, &b.1)),
        };
        if better {
            best = Some((idx, w, v));
        }
    }
    let (idx, w, value) = best.expect("at least one restart");
    let grid = problem.grid;
    let raw: Vec<Atom> = idx
        .iter()
        .zip(w)
        .filter(|(_, w)| *w > 1e-9)
        .map(|(&i, w)| Atom::new(grid.node(i), w))
        .collect();
    let atoms = merge_atoms(raw, MERGE_STEPS * grid.spacing());
    let (classification, h_opt) = classify(&atoms, grid.spacing());
    if classification == Classification::Other {
        warn!("cone maximizer has {} atoms; expected a segment or a triangle", atoms.len());
    }
    debug!("cone solution {classification:?} value {value} after {iterations} moves");
    Ok(ConeSolution {
        atoms,
        value,
        classification,
        h_opt,
        iterations,
        grid: grid.len(),
    })
}

fn lead(idx: &[usize; 3], w: &[f64; 3]) -> usize {
    idx.iter()
        .zip(w)
        .filter(|(_, w)| **w > 1e-9)
        .map(|(i, _)| *i)
        .min()
        .unwrap_or(0)
}

/// Merge atoms closer than `tol` (circularly), placing each cluster at its
/// mass-weighted mean angle.
pub fn merge_atoms(mut atoms: Vec<Atom>, tol: f64) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    let mut out: Vec<Atom> = Vec::new();
    for a in atoms {
        match out.last_mut() {
            Some(last) if circular_distance(last.angle, a.angle) <= tol => {
                let w = last.weight + a.weight;
                let d = wrap_signed(a.angle - last.angle);
                last.angle = wrap_angle(last.angle + d * a.weight / w);
                last.weight = w;
            }
            _ => out.push(a),
        }
    }
    if out.len() > 1 {
        let (first, last) = (out[0], out[out.len() - 1]);
        if circular_distance(first.angle, last.angle) <= tol {
            let w = first.weight + last.weight;
            let d = wrap_signed(first.angle - last.angle);
            out[0] = Atom::new(last.angle + d * first.weight / w, w);
            out.pop();
            out.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        }
    }
    out
}

/// Segment iff two antipodal atoms of weight π; triangle iff three atoms
/// with every gap in `(0, π)`.
pub fn classify(atoms: &[Atom], step: f64) -> (Classification, SupportFn) {
    match atoms {
        [a, b]
            if (circular_distance(a.angle, b.angle) - PI).abs() <= step
                && (a.weight - PI).abs() <= SEGMENT_WEIGHT_TOL
                && (b.weight - PI).abs() <= SEGMENT_WEIGHT_TOL =>
        {
            (Classification::Segment, SupportFn::segment(a.angle))
        }
        [a, b, c] => match TriangleSpec::new(a.angle, b.angle, c.angle) {
            Ok(t) => (Classification::Triangle, SupportFn::Triangle(t)),
            Err(_) => (
                Classification::Other,
                SupportFn::Polygon(Polygon::from_atoms_unchecked(atoms.to_vec())),
            ),
        },
        _ => (
            Classification::Other,
            SupportFn::Polygon(Polygon::from_atoms_unchecked(atoms.to_vec())),
        ),
    }
}

/// Best triangle and best needle for a functional.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleOptimum {
    pub triangle: TriangleSpec,
    pub triangle_value: f64,
    /// Needle angle in `[0, π)`.
    pub segment_alpha: f64,
    pub segment_value: f64,
    /// True when the needle beats every triangle found.
    pub segment_wins: bool,
}

impl TriangleOptimum {
    pub fn value(&self) -> f64 {
        self.triangle_value.max(self.segment_value)
    }

    pub fn classification(&self) -> Classification {
        if self.segment_wins {
            Classification::Segment
        } else {
            Classification::Triangle
        }
    }

    pub fn shape(&self) -> SupportFn {
        if self.segment_wins {
            SupportFn::segment(self.segment_alpha)
        } else {
            SupportFn::Triangle(self.triangle)
        }
    }
}

/// Options for the continuous triangle search.
#[derive(Debug, Clone, Copy)]
pub struct TriangleSearch {
    pub restarts: usize,
    pub segment_scan: usize,
    pub nelder_mead: NelderMead,
}

impl Default for TriangleSearch {
    fn default() -> Self {
        Self {
            restarts: 50,
            segment_scan: 1024,
            nelder_mead: NelderMead {
                initial_step: 0.15,
                max_evals: 3000,
                f_tol: 1e-14,
                x_tol: 1e-10,
            },
        }
    }
}

/// Radical inverse of `i` in `base` (Halton sequence).
fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Start points `(θ₁, θ₂ − θ₁, θ₃ − θ₂)` spread over the admissible region.
fn triangle_starts(count: usize) -> Vec<[f64; 3]> {
    (1..=count)
        .map(|i| {
            let t1 = TAU * halton(i, 2);
            let (mut u, mut v) = (halton(i, 3), halton(i, 5));
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            // gaps in the triangle {d12 < π, d23 < π, d12 + d23 > π}
            let (d12, d23) = (PI * (1.0 - u), PI * (1.0 - v));
            // pull 5% toward the equilateral centre
            let c = TAU / 3.0;
            [t1, c + 0.95 * (d12 - c), c + 0.95 * (d23 - c)]
        })
        .collect()
}

/// Minimize `f(T)` over triangles of class 𝒜, with a quadratic penalty
/// once any gap comes within [`REPULSION_MARGIN`] of 0 or π.
pub fn minimize_over_triangles(f: impl Fn(&TriangleSpec) -> f64 + Sync, opts: TriangleSearch) -> (TriangleSpec, f64) {
    let objective = |x: &[f64]| -> f64 {
        match TriangleSpec::from_gaps(x[0], x[1], x[2]) {
            Ok(t) => {
                let m = t.margin();
                let penalty = if m < REPULSION_MARGIN {
                    1e3 * (REPULSION_MARGIN - m).powi(2)
                } else {
                    0.0
                };
                f(&t) + penalty
            }
            Err(_) => {
                let g = [x[1], x[2], TAU - x[1] - x[2]];
                let viol: f64 = g.iter().map(|g| (-g).max(g - PI).max(0.0)).sum();
                1e6 * (1.0 + viol)
            }
        }
    };
    let coarse = NelderMead {
        x_tol: 1e-5,
        f_tol: 1e-10,
        max_evals: opts.nelder_mead.max_evals / 8,
        ..opts.nelder_mead
    };
    let runs: Vec<(Vec<f64>, f64)> = triangle_starts(opts.restarts)
        .into_par_iter()
        .map(|x0| {
            let (x, v, _) = nelder_mead(objective, &x0, coarse);
            (x, v)
        })
        .collect();
    // polish the best few to full tolerance, restarting the simplex once
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].1.total_cmp(&runs[b].1).then(a.cmp(&b)));
    let polished: Vec<(Vec<f64>, f64)> = order
        .iter()
        .take(POLISH_COUNT)
        .map(|&i| {
            let (mut x, mut v) = runs[i].clone();
            for step in [opts.nelder_mead.initial_step * 0.1, 1e-3] {
                let o = NelderMead {
                    initial_step: step,
                    ..opts.nelder_mead
                };
                let (x2, v2, _) = nelder_mead(objective, &x, o);
                if v2 <= v {
                    x = x2;
                    v = v2;
                }
            }
            (x, v)
        })
        .collect();
    let mut best = 0;
    for (i, r) in polished.iter().enumerate() {
        if r.1 < polished[best].1 {
            best = i;
        }
    }
    let x = &polished[best].0;
    let t = TriangleSpec::from_gaps(x[0], x[1], x[2]).unwrap_or_else(|_| TriangleSpec::equilateral(0.0));
    (t, f(&t))
}

/// Number of coarse optima refined to full tolerance.
const POLISH_COUNT: usize = 3;

/// A triangle this close to the boundary of the admissible angles is a
/// needle for classification purposes.
pub const DEGENERATE_MARGIN: f64 = 1e-3;

/// Best needle `Σ_α` by a uniform scan of `[0, π)` and golden refinement.
pub fn best_segment(f: impl Fn(f64) -> f64, scan: usize) -> (f64, f64) {
    let step = PI / scan as f64;
    let vals: Vec<f64> = (0..scan).map(|i| f(i as f64 * step)).collect();
    let i = vals
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > vals[b] { i } else { b });
    let a0 = i as f64 * step;
    let (a, v) = golden_max(&f, a0 - step, a0 + step, 1e-11);
    if v >= vals[i] {
        (wrap_axis(a), v)
    } else {
        (a0, vals[i])
    }
}

/// Maximize `J` over triangles and needles of class 𝒜.
pub fn maximize_over_triangles(coeffs: &QuadCoeffs) -> TriangleOptimum {
    maximize_over_triangles_with(coeffs, TriangleSearch::default())
}

pub fn maximize_over_triangles_with(coeffs: &QuadCoeffs, opts: TriangleSearch) -> TriangleOptimum {
    let (triangle, neg) = minimize_over_triangles(|t| -eval_j(coeffs, &SupportFn::Triangle(*t)), opts);
    let (segment_alpha, segment_value) =
        best_segment(|a| eval_j(coeffs, &SupportFn::segment(a)), opts.segment_scan);
    let triangle_value = -neg;
    TriangleOptimum {
        triangle,
        triangle_value,
        segment_alpha,
        segment_value,
        segment_wins: segment_value >= triangle_value - 1e-9 * triangle_value.abs().max(1.0)
            || triangle.margin() < DEGENERATE_MARGIN,
    }
}

/// Triangle of class 𝒜 nearest to `c` in the L² metric, with `∫(h_T − h_C)²`.
pub fn nearest_triangle(c: &SupportFn) -> (TriangleSpec, f64) {
    let coeffs = QuadCoeffs::distance_to(c);
    let (h2, _) = c.energies();
    let (t, v) = minimize_over_triangles(|t| eval_j(&coeffs, &SupportFn::Triangle(*t)), TriangleSearch::default());
    (t, v + h2)
}

/// `∂a₁/∂θⱼ` written with half-angle cotangents; equals the first row of
/// [`TriangleSpec::length_jacobian`].
pub fn first_length_gradient(t: &TriangleSpec) -> [f64; 3] {
    let [t1, t2, t3] = t.angles();
    let h12 = (t2 - t1) / 2.0;
    let h13 = (t1 - t3) / 2.0;
    let d2 = FRAC_PI_2 / h13.tan() / h12.sin().powi(2);
    let d3 = -FRAC_PI_2 / h12.tan() / h13.sin().powi(2);
    let d1 = -PI / 4.0 * ((t1 - t2).sin() + (t1 - t3).sin()) / (h12.sin().powi(2) * h13.sin().powi(2));
    [d1, d2, d3]
}

/// Criticality report for `T` as a critical point of `∫(h_T − h_C)²`
/// among triangles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleCriticality {
    pub i1: f64,
    pub i2: f64,
    pub j1: f64,
    pub j2: f64,
    pub k1: f64,
    pub k2: f64,
    /// `I = ∫(h_T − h_C) h_T`.
    pub i: f64,
    /// `I − (a₁I₁ − a₃J₂)`; holds for every `T`.
    pub decomposition: f64,
    /// Stationarity in `θ₁, θ₂, θ₃` (half the gradient of the functional).
    pub stationarity: [f64; 3],
    /// `I₁/sin²((θ₂−θ₁)/2) + J₂/sin²((θ₃−θ₂)/2)`.
    pub pair_balance: f64,
    /// The six ratios `−I₁/(2s₁₂²), J₂/(2s₂₃²), −J₁/(2s₂₃²), K₂/(2s₃₁²),
    /// −K₁/(2s₃₁²), I₂/(2s₁₂²)`, `s_ij = sin(gap/2)`.
    pub ratios: [f64; 6],
    /// `I − ratio`: the ratios read as equal to `I`.
    pub ratio_minus_i: [f64; 6],
    /// `ratio + I/(2π)`: the ratios read as equal to `−I/(2π)`.
    pub ratio_plus_i_over_2pi: [f64; 6],
    /// `a₃∫_{θ₂}^{θ₃}(h_T−h_C)cos(θ−θ₃) − a₁∫_{θ₁}^{θ₂}(h_T−h_C)cos(θ−θ₁)`.
    pub cosine_balance: f64,
    /// `I − (2π/9)(I₁ − I₂ + J₁ − J₂ + K₁ − K₂)`, for equilateral `T` only.
    pub equilateral_expansion: Option<f64>,
    /// Central differences (step 10⁻⁵) of `∫(h_T − h_C)²` in `θ₁, θ₂, θ₃`.
    pub fd_gradient: [f64; 3],
    /// `Σⱼ ∂a₁/∂θⱼ`.
    pub first_length_gradient_sum: f64,
}

impl TriangleCriticality {
    pub fn max_stationarity(&self) -> f64 {
        self.stationarity.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_fd_gradient(&self) -> f64 {
        self.fd_gradient.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

const ARC_PANEL: f64 = TAU / 256.0;

pub fn triangle_criticality(t: &TriangleSpec, c: &SupportFn) -> TriangleCriticality {
    let [t1, t2, t3] = t.angles();
    let [a1, _, a3] = t.lengths();
    let ht = SupportFn::Triangle(*t);
    let atoms = t.atoms();
    let ck = c.kinks();
    let diff = |x: f64| atoms_pair(&atoms, x).0 - c.eval(x);
    let arc = |lo: f64, hi: f64, g: &dyn Fn(f64) -> f64| {
        interval_rule(lo, hi, &ck, ARC_PANEL, 8).integrate(|x| diff(x) * g(x))
    };
    let i1 = arc(t1, t2, &|x| (x - t1).sin());
    let i2 = arc(t1, t2, &|x| (x - t2).sin());
    let j1 = arc(t2, t3, &|x| (x - t2).sin());
    let j2 = arc(t2, t3, &|x| (x - t3).sin());
    let k1 = arc(t3, t1 + TAU, &|x| (x - t3).sin());
    let k2 = arc(t3, t1 + TAU, &|x| (x - t1).sin());
    let c12 = arc(t1, t2, &|x| (x - t1).cos());
    let c23 = arc(t2, t3, &|x| (x - t3).cos());
    let i = {
        let mut breaks = ck.clone();
        breaks.extend(ht.kinks());
        periodic_rule(&breaks, ARC_PANEL, 8).integrate(|x| {
            let h = atoms_pair(&atoms, x).0;
            (h - c.eval(x)) * h
        })
    };
    let jac = t.length_jacobian();
    let stationarity = [
        jac[0][0] * i1 - a1 * c12 - jac[2][0] * j2,
        jac[0][1] * i1 - jac[2][1] * j2,
        jac[0][2] * i1 + a3 * c23 - jac[2][2] * j2,
    ];
    let [g12, g23, g31] = t.gaps();
    let s12 = (g12 / 2.0).sin().powi(2);
    let s23 = (g23 / 2.0).sin().powi(2);
    let s31 = (g31 / 2.0).sin().powi(2);
    let ratios = [
        -i1 / (2.0 * s12),
        j2 / (2.0 * s23),
        -j1 / (2.0 * s23),
        k2 / (2.0 * s31),
        -k1 / (2.0 * s31),
        i2 / (2.0 * s12),
    ];
    let equilateral = t.gaps().iter().all(|g| (g - TAU / 3.0).abs() < 1e-9);
    let sq = |th: [f64; 3]| -> f64 {
        match TriangleSpec::new(th[0], th[1], th[2]) {
            Ok(tt) => {
                let at = tt.atoms();
                let mut breaks = ck.clone();
                breaks.extend(at.iter().map(|a| a.angle));
                periodic_rule(&breaks, ARC_PANEL, 8).integrate(|x| (atoms_pair(&at, x).0 - c.eval(x)).powi(2))
            }
            Err(_) => f64::NAN,
        }
    };
    let step = 1e-5;
    let fd_gradient = [0, 1, 2].map(|j| {
        let mut p = [t1, t2, t3];
        let mut m = p;
        p[j] += step;
        m[j] -= step;
        (sq(p) - sq(m)) / (2.0 * step)
    });
    TriangleCriticality {
        i1,
        i2,
        j1,
        j2,
        k1,
        k2,
        i,
        decomposition: i - (a1 * i1 - a3 * j2),
        stationarity,
        pair_balance: i1 / s12 + j2 / s23,
        ratios,
        ratio_minus_i: ratios.map(|r| i - r),
        ratio_plus_i_over_2pi: ratios.map(|r| r + i / TAU),
        cosine_balance: a3 * c23 - a1 * c12,
        equilateral_expansion: equilateral
            .then(|| i - TAU / 9.0 * (i1 - i2 + j1 - j2 + k1 - k2)),
        fd_gradient,
        first_length_gradient_sum: first_length_gradient(t).iter().sum(),
    }
}

/// Algebraic identities of a triangle of class 𝒜.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureResiduals {
    /// `Σ a_k cos θ_k`.
    pub cos_sum: f64,
    /// `Σ a_k sin θ_k`.
    pub sin_sum: f64,
    /// `Σ sin(gaps) − 4 Π sin(gap/2)` with the gaps `θ₂−θ₁, θ₃−θ₂, 2π+θ₁−θ₃`.
    pub product_form: f64,
}

impl ClosureResiduals {
    pub fn max_abs(&self) -> f64 {
        self.cos_sum.abs().max(self.sin_sum.abs()).max(self.product_form.abs())
    }
}

pub fn closure_identities(t: &TriangleSpec) -> ClosureResiduals {
    let th = t.angles();
    let a = t.lengths();
    let cos_sum = (0..3).map(|k| a[k] * th[k].cos()).sum();
    let sin_sum = (0..3).map(|k| a[k] * th[k].sin()).sum();
    let g = t.gaps();
    let product = 4.0 * (g[1] / 2.0).sin() * (g[0] / 2.0).sin() * (g[2] / 2.0).sin();
    ClosureResiduals {
        cos_sum,
        sin_sum,
        product_form: t.sine_sum() - product,
    }
}

/// Needle angles of the segment family whose value is within `tol` of the
/// best; used to compare solvers on rotation-invariant problems.
pub fn same_segment(a: f64, b: f64, tol: f64) -> bool {
    axis_distance(a, b) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weingarten::equilateral_closed_form;

    #[test]
    fn j_examples() {
        let q = QuadCoeffs::l2_energy();
        assert!((eval_j(&q, &SupportFn::disc()) - TAU).abs() < 1e-12);
        let want = PI.powi(3) / 4.0;
        for a in [0.0, 0.9, 2.5] {
            assert!((eval_j(&q, &SupportFn::segment(a)) - want).abs() < 1e-12);
            let d = eval_j(&QuadCoeffs::derivative_energy(), &SupportFn::segment(a));
            assert!((d - want).abs() < 1e-12);
        }
    }

    #[test]
    fn j_of_equilateral_matches_arc_form() {
        let q = QuadCoeffs::l2_energy();
        let v = eval_j(&q, &SupportFn::Triangle(TriangleSpec::equilateral(0.4)));
        let rule = periodic_rule(&[0.4, 0.4 + TAU / 3.0, 0.4 + 2.0 * TAU / 3.0], TAU / 256.0, 8);
        let w = rule.integrate(|t| equilateral_closed_form(0.4, t).powi(2));
        assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn negative_b_rejected() {
        let r = QuadCoeffs::new(
            CoeffFn::Const(1.0),
            CoeffFn::Const(-0.1),
            CoeffFn::Const(0.0),
            CoeffFn::Const(0.0),
        );
        assert!(matches!(r, Err(GeomError::InvalidCoeffs(_))));
        let r = QuadCoeffs::new(
            CoeffFn::Const(0.0),
            CoeffFn::Const(0.0),
            CoeffFn::Const(1.0),
            CoeffFn::Const(0.0),
        );
        assert!(matches!(r, Err(GeomError::InvalidCoeffs(_))));
    }

    #[test]
    fn cone_matrix_matches_direct_quadrature() {
        let q = QuadCoeffs::random(&mut rng(3));
        let p = ConeProblem::new(&q, 64).unwrap();
        let idx = [0usize, 22, 45];
        let w = p.vertex_weights(&idx).unwrap();
        let mut full = vec![0.0; 64];
        for (i, w) in idx.iter().zip(w) {
            full[*i] = w;
        }
        let g = p.grid();
        let t = TriangleSpec::new(g.node(0), g.node(22), g.node(45)).unwrap();
        let direct = eval_j(&q, &SupportFn::Triangle(t));
        assert!((p.value(&full) - direct).abs() < 1e-10, "{} vs {direct}", p.value(&full));
        assert!((p.vertex_value(&idx, &w) - direct).abs() < 1e-10);
    }

    #[test]
    fn l2_energy_maximizer_is_a_segment() {
        let s = maximize_over_cone(&QuadCoeffs::l2_energy(), 64, 4, 1).unwrap();
        assert_eq!(s.classification, Classification::Segment);
        assert!((s.value - PI.powi(3) / 4.0).abs() < 1e-9);
    }

    #[test]
    fn merge_handles_wraparound() {
        let atoms = vec![Atom::new(0.01, 1.0), Atom::new(TAU - 0.01, 1.0), Atom::new(2.0, 1.0)];
        let m = merge_atoms(atoms, 0.05);
        assert_eq!(m.len(), 2);
        assert!(m.iter().any(|a| circular_distance(a.angle, 0.0) < 1e-12 && (a.weight - 2.0).abs() < 1e-15));
    }

    #[test]
    fn first_length_gradient_matches_quotient_rule() {
        let t = TriangleSpec::new(0.3, 2.1, 4.0).unwrap();
        let g = first_length_gradient(&t);
        let j = t.length_jacobian();
        for k in 0..3 {
            assert!((g[k] - j[0][k]).abs() < 1e-12, "{k}: {} vs {}", g[k], j[0][k]);
        }
    }

    #[test]
    fn equilateral_closure_vanishes() {
        let r = closure_identities(&TriangleSpec::equilateral(0.0));
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn self_target_has_zero_integrals() {
        let t = TriangleSpec::equilateral(0.2);
        let r = triangle_criticality(&t, &SupportFn::Triangle(t));
        for v in [r.i1, r.i2, r.j1, r.j2, r.k1, r.k2, r.i] {
            assert!(v.abs() < 1e-14);
        }
    }
}
