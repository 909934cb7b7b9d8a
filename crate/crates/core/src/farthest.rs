//! Farthest convex sets from a body `C` of class 𝒜.
//!
//! In both metrics the farthest set is a needle `Σ_α`. For the Hausdorff
//! distance `α` is any angle at which `h_C` is maximal. For the L² distance
//!
//! ```text
//! d₂(C, Σ_α)² = π³/4 + ∫h_C² − 2π g(α),   g(α) = ∫₀^π h_C(θ + α) sin θ dθ,
//! ```
//!
//! so the farthest needle minimizes `g`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::grid::{axis_distance, wrap_axis};
use crate::optimize::golden_min;
use crate::quadrature::interval_rule;
use crate::support::{hausdorff_distance, l2_distance, SupportFn, PANEL_LEN};

/// Maxima of `h_C` within this band count as ties.
pub const PLATEAU_TOL: f64 = 1e-6;

/// A `g` profile flatter than this is reported as degenerate.
pub const FLAT_PROFILE_TOL: f64 = 1e-8;

/// Scan resolution for `g` over `[0, π)`.
pub const PROFILE_SCAN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Hausdorff,
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    /// Angle at which `h_C` is maximal.
    Hausdorff { argmax: f64, max_h: f64 },
    /// `g` sampled on `[0, π)` and the expansion value of `d₂`.
    L2 {
        profile: Vec<[f64; 2]>,
        g_star: f64,
        expansion_distance: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarthestResult {
    pub metric: Metric,
    /// Needle angle in `[0, π)`.
    pub alpha_star: f64,
    pub distance: f64,
    pub certificate: Certificate,
    pub degenerate_flag: bool,
}

impl FarthestResult {
    pub fn segment(&self) -> SupportFn {
        SupportFn::segment(self.alpha_star)
    }
}

/// Farthest needle in the Hausdorff metric.
///
/// On a plateau of maxima the smallest angle is returned and the result is
/// flagged degenerate; maxima at antipodal angles describe the same needle
/// and do not count as distinct.
pub fn farthest_hausdorff(c: &SupportFn) -> FarthestResult {
    let mm = c.min_max();
    let near = c.near_maxima(PLATEAU_TOL);
    let axis = wrap_axis(mm.argmax);
    let degenerate = near
        .iter()
        .any(|(t, _)| axis_distance(*t, axis) > 1e-4);
    let alpha_star = axis;
    FarthestResult {
        metric: Metric::Hausdorff,
        alpha_star,
        distance: hausdorff_distance(c, &SupportFn::segment(alpha_star)),
        certificate: Certificate::Hausdorff {
            argmax: mm.argmax,
            max_h: mm.max,
        },
        degenerate_flag: degenerate,
    }
}

/// `g(α) = ∫₀^π h_C(θ + α) sin θ dθ`.
pub fn g_profile(c: &SupportFn, alpha: f64) -> f64 {
    let rule = interval_rule(alpha, alpha + PI, &c.kinks(), PANEL_LEN, 8);
    rule.integrate(|t| c.eval(t) * (t - alpha).sin())
}

/// Farthest needle in the L² metric: minimizes `g` over `[0, π)` by a
/// 512-point scan and golden-section refinement.
pub fn farthest_l2(c: &SupportFn) -> FarthestResult {
    let step = PI / PROFILE_SCAN as f64;
    let profile: Vec<[f64; 2]> = (0..PROFILE_SCAN)
        .map(|i| {
            let a = i as f64 * step;
            [a, g_profile(c, a)]
        })
        .collect();
    let (lo, hi) = profile
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[1]), hi.max(p[1]))
        });
    let degenerate = hi - lo < FLAT_PROFILE_TOL;
    let alpha_star = if degenerate {
        0.0
    } else {
        // first index attaining the minimum
        let i = profile
            .iter()
            .enumerate()
            .fold(0, |b, (i, p)| if p[1] < profile[b][1] { i } else { b });
        let a0 = profile[i][0];
        let (a, v) = golden_min(|a| g_profile(c, a), a0 - step, a0 + step, 1e-10);
        if v <= profile[i][1] {
            wrap_axis(a)
        } else {
            a0
        }
    };
    let g_star = g_profile(c, alpha_star);
    let (h2, _) = c.energies();
    let g_pair = g_star + g_profile(c, alpha_star + PI);
    let expansion = (PI.powi(3) / 4.0 + h2 - PI * g_pair).max(0.0).sqrt();
    let seg = SupportFn::segment(alpha_star);
    FarthestResult {
        metric: Metric::L2,
        alpha_star,
        distance: l2_distance(c, &seg),
        certificate: Certificate::L2 {
            profile,
            g_star,
            expansion_distance: expansion,
        },
        degenerate_flag: degenerate,
    }
}

/// Residuals of the sharp inequalities on class 𝒜; each is `≤ 0` when the
/// inequality holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpReport {
    /// `max h − π/2`.
    pub max_h_excess: f64,
    /// `π/2 − (min h + max h)`.
    pub width_sum_deficit: f64,
    /// `∫h² + ∫h'² − 16π/3`.
    pub h1_excess: f64,
    /// `∫h'² − ∫h²`.
    pub derivative_excess: f64,
    /// `∫h² − ¼∫h'² − 2π`.
    pub energy_excess: f64,
}

impl SharpReport {
    pub fn residuals(&self) -> [(&'static str, f64); 5] {
        [
            ("max_h_excess", self.max_h_excess),
            ("width_sum_deficit", self.width_sum_deficit),
            ("h1_excess", self.h1_excess),
            ("derivative_excess", self.derivative_excess),
            ("energy_excess", self.energy_excess),
        ]
    }

    pub fn worst(&self) -> f64 {
        self.residuals()
            .iter()
            .map(|r| r.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn sharp_inequality_report(c: &SupportFn) -> SharpReport {
    let mm = c.min_max();
    let (h2, dh2) = c.energies();
    SharpReport {
        max_h_excess: mm.max - FRAC_PI_2,
        width_sum_deficit: FRAC_PI_2 - (mm.min + mm.max),
        h1_excess: h2 + dh2 - 16.0 * PI / 3.0,
        derivative_excess: dh2 - h2,
        energy_excess: h2 - 0.25 * dh2 - 2.0 * PI,
    }
}
