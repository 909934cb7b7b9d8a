use std::f64::consts::{FRAC_PI_2, PI, TAU};

use convex_support::json::{parse_shape, shape_to_json};
use convex_support::random::{random_class_a, Style};
use convex_support::support::{hausdorff_distance, l2_distance};
use convex_support::{AngleGrid, SupportFn};
use proptest::prelude::*;

fn style() -> impl Strategy<Value = Style> {
    prop_oneof![
        Just(Style::Atoms(2)),
        Just(Style::Atoms(3)),
        (4usize..9).prop_map(Style::Atoms),
        Just(Style::Smooth),
        Just(Style::Mixed),
    ]
}

fn body() -> impl Strategy<Value = SupportFn> {
    (any::<u64>(), style()).prop_map(|(seed, s)| random_class_a(seed, s).unwrap())
}

fn exact_body() -> impl Strategy<Value = SupportFn> {
    (any::<u64>(), prop_oneof![Just(Style::Atoms(2)), Just(Style::Atoms(3)), (4usize..9).prop_map(Style::Atoms)])
        .prop_map(|(seed, s)| random_class_a(seed, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn class_a_invariants(c in body()) {
        let (dp, ds) = c.class_a_residuals();
        let tol = if c.grid_len() > 0 { 1e-6 } else { 1e-9 };
        prop_assert!(dp.abs() <= 1e-9, "perimeter residual {dp:e}");
        prop_assert!(ds <= tol, "steiner residual {ds:e}");
        prop_assert!(c.check_convex().is_ok());
    }

    #[test]
    fn mcmullen_bounds(c in body()) {
        let m = c.min_max();
        prop_assert!(m.max <= FRAC_PI_2 + 1e-9);
        prop_assert!(FRAC_PI_2 <= m.min + m.max + 1e-9);
    }

    #[test]
    fn perimeter_is_linear_under_minkowski(a in body(), b in body(), t in 0.0f64..1.0) {
        let m = SupportFn::minkowski(t, &a, 1.0 - t, &b);
        // A grid operand forces the exact one onto the grid; compare against
        // the perimeters of what was actually combined.
        let (pa, pb) = match m.grid_len() {
            0 => (a.perimeter(), b.perimeter()),
            n => {
                let g = AngleGrid::new(n).unwrap();
                (SupportFn::Grid(a.to_grid(g)).perimeter(), SupportFn::Grid(b.to_grid(g)).perimeter())
            }
        };
        let err = (m.perimeter() - (t * pa + (1.0 - t) * pb)).abs();
        prop_assert!(err <= 1e-9, "{err:e}");
    }

    #[test]
    fn steiner_is_translation_equivariant(c in exact_body(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let s = c.translated([x, y]).steiner();
        let s0 = c.steiner();
        prop_assert!((s[0] - s0[0] - x).abs() <= 1e-9 && (s[1] - s0[1] - y).abs() <= 1e-9);
    }

    #[test]
    fn distances_are_metrics(a in body(), b in body(), c in body()) {
        for d in [hausdorff_distance, l2_distance] {
            let ab = d(&a, &b);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - d(&b, &a)).abs() <= 1e-9);
            prop_assert!(d(&a, &c) <= ab + d(&b, &c) + 1e-9);
            prop_assert!(d(&a, &a) <= 1e-9);
        }
    }

    #[test]
    fn shapes_round_trip_through_json(c in body()) {
        let back = parse_shape(&shape_to_json(&c)).unwrap();
        for i in 0..97 {
            let t = TAU * i as f64 / 97.0;
            prop_assert!((back.eval(t) - c.eval(t)).abs() <= 1e-12);
        }
    }

    #[test]
    fn rotation_preserves_distances(a in exact_body(), b in exact_body(), phi in 0.0f64..PI) {
        let d = hausdorff_distance(&a, &b);
        let r = hausdorff_distance(&a.rotated(phi), &b.rotated(phi));
        prop_assert!((d - r).abs() <= 1e-9);
    }
}
