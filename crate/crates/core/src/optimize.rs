//! Derivative-free one- and multi-dimensional search.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Returns the best point seen (including the endpoints) and its value.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut best = (lo, f(lo));
    let fh = f(hi);
    if fh > best.1 {
        best = (hi, fh);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Golden-section search for a minimum.
pub fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|t| -f(t), lo, hi, tol);
    (x, -v)
}

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop once the simplex values spread less than this (relative to
    /// `max(1, |f_best|)`).
    pub f_tol: f64,
    /// ... and its vertices lie within this distance of the best vertex.
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            max_evals: 4000,
            f_tol: 1e-14,
            x_tol: 1e-10,
        }
    }
}

/// Minimize `f` from `x0` with the standard Nelder-Mead simplex
/// (reflection 1, expansion 2, contraction ½, shrink ½).
///
/// Returns the best point, its value and the number of evaluations.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    opts: NelderMead,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
    };

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let size = simplex[1..]
            .iter()
            .map(|x| {
                x.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol * vals[0].abs().max(1.0) && size <= opts.x_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();

        let xr = lerp(&centroid, &worst, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = lerp(&centroid, &worst, -2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = lerp(&centroid, &xr, 0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = lerp(&centroid, &worst, 0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < vals[n].min(fr) {
            simplex[n] = xc;
            vals[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = lerp(&best, &simplex[i], 0.5);
            vals[i] = f(&simplex[i]);
        }
        evals += n;
    }
    let (i, v) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("non-empty simplex");
    (simplex[i].clone(), v, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|t| -(t - 0.3).powi(2) + 2.0, -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn golden_keeps_endpoint_maximum() {
        let (x, _) = golden_max(|t| t, 0.0, 1.0, 1e-9);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMead {
            max_evals: 20_000,
            ..Default::default()
        };
        let (x, v, _) = nelder_mead(rosen, &[-1.2, 1.0], opts);
        assert!(v < 1e-12, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5);
    }
}
