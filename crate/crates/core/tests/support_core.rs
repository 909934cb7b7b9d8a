use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};

use convex_support::random::{random_class_a, Style};
use convex_support::support::{hausdorff_distance, l2_distance};
use convex_support::weingarten::polygon_support;
use convex_support::{AngleGrid, GridSamples, SupportFn, TriangleSpec};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}

/// Rectangle `w × l` centred at the origin; perimeter `2(w + l)`.
fn rectangle(w: f64, l: f64) -> SupportFn {
    polygon_support(&[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2], &[l, w, l, w], false).unwrap()
}

#[test]
fn evaluate_examples() {
    close(SupportFn::segment(0.0).eval(FRAC_PI_2), FRAC_PI_2, 1e-15);
    for t in [0.0, 1.0, 4.0] {
        close(SupportFn::disc().eval(t), 1.0, 1e-15);
    }
    close(SupportFn::segment(FRAC_PI_4).eval(FRAC_PI_4), 0.0, 1e-15);
}

#[test]
fn perimeter_examples() {
    for k in 0..8 {
        close(SupportFn::segment(0.4 * k as f64).perimeter(), TAU, 1e-12);
    }
    close(SupportFn::disc().perimeter(), TAU, 1e-12);
    let t = TriangleSpec::new(0.0, TAU / 3.0, 2.0 * TAU / 3.0).unwrap();
    for a in t.lengths() {
        close(a, TAU / 3.0, 1e-12);
    }
    close(SupportFn::Triangle(t).perimeter(), TAU, 1e-12);
}

#[test]
fn steiner_examples() {
    let s = SupportFn::segment(1.1).steiner();
    close(s[0], 0.0, 1e-12);
    close(s[1], 0.0, 1e-12);
    let s = SupportFn::fourier(1.0, [(1, 0.3, 0.0)]).steiner();
    close(s[0], 0.3, 1e-12);
    close(s[1], 0.0, 1e-12);
    let g = GridSamples::from_fn(AngleGrid::new(720).unwrap(), |t| 1.0 + 0.1 * (2.0 * t).cos());
    let s = SupportFn::Grid(g).steiner();
    assert!(s[0].hypot(s[1]) <= 1e-9);
}

#[test]
fn normalization_examples() {
    let h = SupportFn::fourier(2.0, []).normalize_to_class_a().unwrap();
    let SupportFn::Fourier(f) = &h else { panic!("{h:?}") };
    close(f.c0, 1.0, 1e-12);
    assert!(f.terms.is_empty());

    let h = SupportFn::fourier(1.0, [(1, 0.3, 0.0)]).normalize_to_class_a().unwrap();
    let SupportFn::Fourier(f) = &h else { panic!("{h:?}") };
    close(f.c0, 1.0, 1e-12);
    assert!(f.terms.iter().all(|t| t.k != 1));

    let seg = SupportFn::segment(0.7);
    assert_eq!(seg.normalize_to_class_a().unwrap(), seg);
}

#[test]
fn normalized_grid_is_in_class_a() {
    let g = GridSamples::from_fn(AngleGrid::new(720).unwrap(), |t| 2.0 + 0.4 * t.cos() - 0.2 * t.sin() + 0.1 * (3.0 * t).cos());
    let h = SupportFn::Grid(g).normalize_to_class_a().unwrap();
    let (dp, ds) = h.class_a_residuals();
    assert!(dp.abs() <= 1e-9 && ds <= 1e-6, "{dp:e} {ds:e}");
}

#[test]
fn min_max_examples() {
    let m = SupportFn::segment(0.0).min_max();
    close(m.min, 0.0, 1e-12);
    close(m.max, FRAC_PI_2, 1e-12);
    close(m.argmin, 0.0, 1e-12);
    close(m.argmax, FRAC_PI_2, 1e-12);

    let m = SupportFn::disc().min_max();
    close(m.min, 1.0, 1e-12);
    close(m.max, 1.0, 1e-12);
    close(m.argmin, 0.0, 1e-12);
    close(m.argmax, 0.0, 1e-12);
}

#[test]
fn thin_rectangle_extrema() {
    let alpha = 0.1;
    let r = rectangle(alpha, PI - alpha);
    close(r.perimeter(), TAU, 1e-12);
    let m = r.min_max();
    close(m.min, alpha / 2.0, 1e-12);
    close(m.max, (alpha * alpha + (PI - alpha).powi(2)).sqrt() / 2.0, 1e-9);
    close(m.max, 1.5216, 1e-4);
}

#[test]
fn hausdorff_examples() {
    close(hausdorff_distance(&SupportFn::segment(0.0), &SupportFn::segment(FRAC_PI_2)), FRAC_PI_2, 1e-12);
    let c = SupportFn::fourier(1.0, [(2, -0.1, 0.0), (3, 0.05, 0.0)]);
    close(hausdorff_distance(&c, &c), 0.0, 1e-15);
    for k in 0..6 {
        let alpha = 0.5 * k as f64;
        close(hausdorff_distance(&SupportFn::disc(), &SupportFn::segment(alpha)), 1.0, 1e-12);
    }
}

#[test]
fn l2_examples() {
    let c = SupportFn::fourier(1.0, [(2, -0.1, 0.0), (3, 0.05, 0.0)]);
    close(l2_distance(&c, &c), 0.0, 1e-12);
    let want = (PI.powi(3) / 4.0 - TAU).sqrt();
    close(want, 1.211769, 1e-6);
    for k in 0..6 {
        close(l2_distance(&SupportFn::disc(), &SupportFn::segment(0.5 * k as f64)), want, 1e-10);
    }
    // Brute-force trapezoid oracle.
    let n = 200_000;
    let oracle = (0..n)
        .map(|i| TAU * i as f64 / n as f64)
        .map(|t| (FRAC_PI_2 * t.sin().abs() - 1.0).powi(2))
        .sum::<f64>()
        * TAU
        / n as f64;
    close(oracle.sqrt(), want, 1e-9);
}

#[test]
fn odd_harmonic_bodies_are_equidistant_from_needles() {
    let c = SupportFn::fourier(1.0, [(3, 0.05, 0.02), (5, 0.01, 0.0)]);
    let d0 = l2_distance(&c, &SupportFn::segment(0.0));
    for k in 1..32 {
        close(l2_distance(&c, &SupportFn::segment(PI * k as f64 / 32.0)), d0, 1e-10);
    }
}

#[test]
fn boundary_point_examples() {
    let pts = SupportFn::disc().boundary_points(AngleGrid::new(8).unwrap());
    for (p, want) in pts.iter().step_by(2).zip([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]) {
        close(p[0], want[0], 1e-15);
        close(p[1], want[1], 1e-15);
    }
    let pts = SupportFn::segment(0.0).boundary_points(AngleGrid::new(64).unwrap());
    for p in &pts {
        close(p[0], 0.0, 1e-12);
        close(p[1].abs(), FRAC_PI_2, 1e-12);
    }
    assert!(pts.iter().any(|p| p[1] > 0.0) && pts.iter().any(|p| p[1] < 0.0));
}

#[test]
fn equilateral_vertices_lie_on_the_circumcircle() {
    let tri = SupportFn::Triangle(TriangleSpec::equilateral(0.0));
    let SupportFn::Triangle(t) = &tri else { unreachable!() };
    let circumradius = (TAU / 3.0) / 3f64.sqrt();
    let poly = convex_support::Polygon::new(&t.angles(), &t.lengths()).unwrap();
    for (_, v) in poly.vertices() {
        close(v[0].hypot(v[1]), circumradius, 1e-12);
    }
    for p in tri.boundary_points(AngleGrid::new(96).unwrap()) {
        assert!(p[0].hypot(p[1]) <= circumradius + 1e-12);
    }
}

#[test]
fn square_half_diagonal() {
    let sq = rectangle(FRAC_PI_2, FRAC_PI_2);
    close(sq.min_max().max, FRAC_PI_4 * SQRT_2, 1e-12);
}

#[test]
fn random_body_styles() {
    for seed in 0..10 {
        let h = random_class_a(seed, Style::Atoms(2)).unwrap();
        assert!(matches!(h, SupportFn::Segment { .. }), "{h:?}");
        let t = random_class_a(seed, Style::Atoms(3)).unwrap();
        let SupportFn::Triangle(spec) = t else { panic!("{t:?}") };
        close(spec.lengths().iter().sum(), TAU, 1e-12);
        let s = random_class_a(seed, Style::Smooth).unwrap();
        assert!(s.min_max().min > 0.0);
        s.check_convex().unwrap();
    }
}

#[test]
fn nonconvex_grid_is_rejected() {
    let g = GridSamples::new(AngleGrid::new(8).unwrap(), vec![1.0, 1.0, 1.0, 5.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
    assert!(SupportFn::Grid(g).check_convex().is_err());
}

#[test]
fn grid_rejects_odd_sizes() {
    assert!(AngleGrid::new(9).is_err());
    assert!(AngleGrid::new(6).is_err());
}
