//! Quadrature on the circle.
//!
//! Grid-sampled data is integrated with the periodic trapezoid rule. Closed
//! forms are piecewise smooth with kinks at known angles, so they are
//! integrated panel by panel with Gauss-Legendre, splitting at every kink.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use crate::grid::wrap_angle;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if order == 0 { 1.0 } else { p1 };
    let d = order as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

fn cached_rule(order: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static R4: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match order {
        4 => R4.get_or_init(|| gauss_legendre(4)),
        8 => R8.get_or_init(|| gauss_legendre(8)),
        16 => R16.get_or_init(|| gauss_legendre(16)),
        _ => panic!("unsupported cached Gauss-Legendre order {order}"),
    }
}

/// A set of quadrature nodes and weights.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push_panel(&mut self, a: f64, b: f64, max_len: f64, order: usize) {
        let len = b - a;
        if len <= 0.0 {
            return;
        }
        let pieces = (len / max_len).ceil().max(1.0) as usize;
        let h = len / pieces as f64;
        let (x, w) = cached_rule(order);
        for p in 0..pieces {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (xi, wi) in x.iter().zip(w) {
                self.nodes.push(mid + 0.5 * h * xi);
                self.weights.push(0.5 * h * wi);
            }
        }
    }
}

/// Sorted, deduplicated breakpoints in `[0, 2π)`.
pub fn normalize_breaks(breaks: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut b: Vec<f64> = breaks.into_iter().map(wrap_angle).collect();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    if b.len() > 1 && (TAU - b[b.len() - 1] + b[0]) < 1e-14 {
        b.pop();
    }
    b
}

/// Gauss-Legendre panels covering one period, split at `breaks`.
///
/// Nodes may exceed `2π` (the last panel wraps); callers evaluate periodic
/// integrands.
pub fn periodic_rule(breaks: &[f64], max_len: f64, order: usize) -> Rule {
    let b = normalize_breaks(breaks.iter().copied());
    let mut rule = Rule::default();
    if b.is_empty() {
        rule.push_panel(0.0, TAU, max_len, order);
        return rule;
    }
    for i in 0..b.len() {
        let a = b[i];
        let e = if i + 1 < b.len() { b[i + 1] } else { b[0] + TAU };
        rule.push_panel(a, e, max_len, order);
    }
    rule
}

/// Gauss-Legendre panels on `[a, b]` (with `a < b`), split at any of the
/// periodic `breaks` falling strictly inside.
pub fn interval_rule(a: f64, b: f64, breaks: &[f64], max_len: f64, order: usize) -> Rule {
    let mut cuts = vec![a];
    for &t in breaks {
        let t0 = wrap_angle(t);
        // every periodic copy of t inside (a, b)
        let mut k = ((a - t0) / TAU).floor();
        loop {
            let c = t0 + k * TAU;
            if c >= b {
                break;
            }
            if c > a {
                cuts.push(c);
            }
            k += 1.0;
        }
    }
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut rule = Rule::default();
    for w in cuts.windows(2) {
        rule.push_panel(w[0], w[1], max_len, order);
    }
    rule
}

/// Periodic trapezoid rule for uniform samples over one period.
pub fn trapezoid(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n == 0 {
        return 0.0;
    }
    TAU / n as f64 * samples.iter().sum::<f64>()
}
