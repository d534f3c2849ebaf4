//! Property tests for the torus geometry, bracket, and model format.

use proptest::prelude::*;
use resolvent_lab::dispersion::{
    parse_model, sabs, torus_distance, torus_wrap, DispersionModel, TrigPoly,
};

proptest! {
    #[test]
    fn wrap_is_idempotent_and_canonical(x in prop::collection::vec(-100.0f64..100.0, 1..4)) {
        let p = torus_wrap(&x);
        for &c in p.coords() {
            prop_assert!((-0.5..0.5).contains(&c));
        }
        let rewrapped = torus_wrap(p.coords());
        prop_assert_eq!(rewrapped.coords(), p.coords());
    }

    #[test]
    fn torus_metric_axioms(
        a in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-2.0f64..2.0, 3),
        c in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let dab = torus_distance(&a, &b);
        let dba = torus_distance(&b, &a);
        prop_assert!((dab - dba).abs() < 1e-12);
        prop_assert!(dab <= 3f64.sqrt() / 2.0 + 1e-12);
        // Triangle inequality.
        prop_assert!(dab <= torus_distance(&a, &c) + torus_distance(&c, &b) + 1e-12);
        // Shift invariance.
        let shifted: Vec<f64> = a.iter().map(|x| x + 3.0).collect();
        prop_assert!((torus_distance(&shifted, &b) - dab).abs() < 1e-12);
    }

    #[test]
    fn bracket_chain(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        prop_assert!(x.abs() < sabs(x));
        prop_assert!(sabs(x + y) < sabs(x) + sabs(y));
        prop_assert!(sabs(x) + sabs(y) <= 2.0 * sabs(x) * sabs(y));
        prop_assert!(sabs(x * y) <= sabs(x) * sabs(y) * (1.0 + 1e-15));
    }

    #[test]
    fn periodicity_of_random_polynomials(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..4),
        x in prop::collection::vec(-0.5f64..0.5, 2),
        shift in prop::collection::vec(-3i64..=3, 2),
    ) {
        let terms: Vec<(Vec<i64>, f64, f64)> = coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| (vec![1 + i as i64, i as i64], *a, *b))
            .collect();
        let poly = TrigPoly::new(2, 0.25, terms).unwrap();
        let m = DispersionModel::trig("p", poly);
        let y: Vec<f64> = x.iter().zip(&shift).map(|(xi, s)| xi + *s as f64).collect();
        let fx = m.eval(&x);
        prop_assert!((fx - m.eval(&y)).abs() <= 1e-12 * (1.0 + fx.abs()));
    }

    #[test]
    fn dsl_round_trip_evaluates_identically(
        c0 in -2.0f64..2.0,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        x in prop::collection::vec(-0.5f64..0.5, 2),
    ) {
        let text = format!("dim 2\nconst {c0}\ncos 1 0 {a}\nsin 1 -1 {b}\n");
        let parsed = parse_model("t", &text).unwrap();
        let direct = DispersionModel::trig(
            "t",
            TrigPoly::new(2, c0, vec![(vec![1, 0], a, 0.0), (vec![1, -1], 0.0, b)]).unwrap(),
        );
        prop_assert!((parsed.eval(&x) - direct.eval(&x)).abs() < 1e-14);
    }
}
