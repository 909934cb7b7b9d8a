//! Random bodies of class 𝒜 for property sweeps.
//!
//! A nonnegative curvature measure is drawn, projected onto the closure
//! constraints (zero first moments) and rescaled to mass 2π; draws that the
//! projection would make negative are rejected.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result};
use crate::grid::{AngleGrid, DEFAULT_GRID};
use crate::measure::{Atom, CurvatureMeasure};
use crate::support::{FourierSeries, SupportFn};
use crate::weingarten::{sample_density, solve, TriangleSpec};

pub const MAX_REJECTIONS: usize = 100;

/// Highest harmonic in smooth densities.
pub const SMOOTH_MAX_K: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Polygon with `k ≥ 2` sides (`k = 2` is a needle, `k = 3` a triangle).
    Atoms(usize),
    /// Strictly positive trigonometric density.
    Smooth,
    /// Atoms plus a positive density.
    Mixed,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draw one body of class 𝒜.
pub fn random_class_a(seed: u64, style: Style) -> Result<SupportFn> {
    random_class_a_with(&mut rng(seed), style)
}

/// As [`random_class_a`], consuming an existing generator.
pub fn random_class_a_with(rng: &mut impl Rng, style: Style) -> Result<SupportFn> {
    match style {
        Style::Atoms(k) => {
            let atoms = random_atoms(rng, k, TAU)?;
            let measure = CurvatureMeasure::from_atoms(atoms);
            if k == 3 {
                let mut t: Vec<f64> = measure.atoms.iter().map(|a| a.angle).collect();
                t.sort_by(f64::total_cmp);
                if let Ok(tri) = TriangleSpec::new(t[0], t[1], t[2]) {
                    return Ok(SupportFn::Triangle(tri));
                }
            }
            solve(&measure)
        }
        Style::Smooth => {
            let grid = AngleGrid::new(DEFAULT_GRID)?;
            let density = sample_density(&random_density(rng, TAU), grid);
            solve(&CurvatureMeasure::from_density(density))
        }
        Style::Mixed => {
            let grid = AngleGrid::new(DEFAULT_GRID)?;
            let share = rng.gen_range(0.3..0.7);
            let k = rng.gen_range(3..=6);
            let atoms = random_atoms(rng, k, TAU * share)?;
            let density = sample_density(&random_density(rng, TAU * (1.0 - share)), grid);
            // atoms between grid nodes blur the sampled perimeter slightly
            solve(&CurvatureMeasure::from_atoms(atoms).with_density(density))?.normalize_to_class_a()
        }
    }
}

/// `k` closed atoms of total mass `mass`.
pub fn random_atoms(rng: &mut impl Rng, k: usize, mass: f64) -> Result<Vec<Atom>> {
    if k < 2 {
        return Err(GeomError::BadPolygon(format!("need k >= 2 atoms, got {k}")));
    }
    if k == 2 {
        // closure forces an antipodal pair of equal weight
        let alpha = rng.gen_range(0.0..TAU);
        return Ok(vec![
            Atom::new(alpha, mass / 2.0),
            Atom::new(alpha + PI, mass / 2.0),
        ]);
    }
    for _ in 0..MAX_REJECTIONS {
        let angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
        if let Some(w) = project_closed(&angles, &weights) {
            let total: f64 = w.iter().sum();
            return Ok(angles
                .iter()
                .zip(&w)
                .map(|(&t, &w)| Atom::new(t, w * mass / total))
                .collect());
        }
    }
    Err(GeomError::RejectedDraws(MAX_REJECTIONS))
}

/// Orthogonal projection of `w` onto `{Σ w cos θ = Σ w sin θ = 0}`; `None`
/// when the result has a weight below a small positive floor.
fn project_closed(angles: &[f64], w: &[f64]) -> Option<Vec<f64>> {
    let (mut scc, mut scs, mut sss, mut mc, mut ms) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &x) in angles.iter().zip(w) {
        let (s, c) = t.sin_cos();
        scc += c * c;
        scs += c * s;
        sss += s * s;
        mc += x * c;
        ms += x * s;
    }
    let det = scc * sss - scs * scs;
    if det.abs() < 1e-12 {
        return None;
    }
    let lc = (sss * mc - scs * ms) / det;
    let ls = (scc * ms - scs * mc) / det;
    let out: Vec<f64> = angles
        .iter()
        .zip(w)
        .map(|(&t, &x)| x - lc * t.cos() - ls * t.sin())
        .collect();
    let total: f64 = out.iter().sum();
    // keep every side a visible fraction of the perimeter
    if out.iter().all(|&x| x > 1e-3 * total) {
        Some(out)
    } else {
        None
    }
}

/// `mass/2π · (1 + Σ_{k=2}^{K} a_k cos kθ + b_k sin kθ)` with
/// `Σ |a_k| + |b_k| ≤ 0.9`, hence strictly positive.
pub fn random_density(rng: &mut impl Rng, mass: f64) -> FourierSeries {
    let raw: Vec<(u32, f64, f64)> = (2..=SMOOTH_MAX_K)
        .map(|k| {
            let decay = 1.0 / (k * k) as f64;
            (
                k,
                rng.gen_range(-1.0..1.0) * decay,
                rng.gen_range(-1.0..1.0) * decay,
            )
        })
        .collect();
    let l1: f64 = raw.iter().map(|(_, a, b)| a.abs() + b.abs()).sum();
    let amp = rng.gen_range(0.1..0.9) / l1.max(1e-12);
    let s = mass / TAU;
    FourierSeries::new(s, raw.into_iter().map(|(k, a, b)| (k, s * amp * a, s * amp * b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_atoms_give_a_needle() {
        for seed in 0..5 {
            let h = random_class_a(seed, Style::Atoms(2)).unwrap();
            assert!(matches!(h, SupportFn::Segment { .. }), "{h:?}");
        }
    }

    #[test]
    fn three_atoms_give_a_triangle() {
        for seed in 0..20 {
            match random_class_a(seed, Style::Atoms(3)).unwrap() {
                SupportFn::Triangle(t) => {
                    let p: f64 = t.lengths().iter().sum();
                    assert!((p - TAU).abs() < 1e-12);
                }
                other => panic!("expected a triangle, got {other:?}"),
            }
        }
    }

    #[test]
    fn smooth_bodies_contain_the_origin() {
        for seed in 0..5 {
            let h = random_class_a(seed, Style::Smooth).unwrap();
            assert!(h.min_max().min > 0.0);
            let (dp, ds) = h.class_a_residuals();
            assert!(dp.abs() < 1e-9 && ds < 1e-6, "{dp} {ds}");
        }
    }

    #[test]
    fn same_seed_same_body() {
        let a = random_class_a(42, Style::Mixed).unwrap();
        let b = random_class_a(42, Style::Mixed).unwrap();
        assert_eq!(a, b);
    }
}
