use perspective_gap::envelope::concave_envelope;
use perspective_gap::functions::FunctionSpec;
use perspective_gap::geometry::{BoxDomain, Domain, KuhnCell};
use perspective_gap::integration::{integrate_power_multinomial, integrate_power_triangulation};
use perspective_gap::relaxation::{delta, delta_homogeneous, vol_naive, vol_perspective, MuKind};
use proptest::prelude::*;

fn coeffs(max_d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..2.0, 1..=max_d)
}

fn family() -> impl Strategy<Value = FunctionSpec> {
    prop_oneof![
        (coeffs(3), 1.0f64..4.0).prop_map(|(c, q)| FunctionSpec::power(c, q).unwrap()),
        coeffs(3).prop_map(|c| FunctionSpec::exp(c).unwrap()),
        coeffs(3).prop_map(|c| FunctionSpec::superpoly(c).unwrap()),
    ]
}

fn box_for(d: usize) -> impl Strategy<Value = BoxDomain> {
    (prop::collection::vec(0.1f64..2.0, d), 0.2f64..3.0)
        .prop_map(|(v0, u)| BoxDomain::new(v0, u).unwrap())
}

fn instance() -> impl Strategy<Value = (FunctionSpec, BoxDomain)> {
    family().prop_flat_map(|f| {
        let d = f.dim();
        (Just(f), box_for(d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn delta_nonnegative_and_bound_independent((f, b) in instance()) {
        let dom: Domain = b.into();
        let gap = |mu| vol_naive(&f, mu, &dom).unwrap() - vol_perspective(&f, mu, &dom).unwrap();
        let (a, e) = (gap(MuKind::Constant), gap(MuKind::ConcaveEnvelope));
        let dl = delta(&f, &dom).unwrap();
        prop_assert!(dl >= -1e-10);
        prop_assert!((a - e).abs() <= 1e-9 * dl.abs().max(1.0));
        prop_assert!((a - dl).abs() <= 1e-9 * dl.abs().max(1.0));
    }

    #[test]
    fn homogeneous_shortcut_matches_generic(c in coeffs(3), q in 1.0f64..5.0, v in 0.1f64..2.0, u in 0.2f64..3.0) {
        let f = FunctionSpec::power(c.clone(), q).unwrap();
        let dom: Domain = BoxDomain::new(vec![v; c.len()], u).unwrap().into();
        let (g, h) = (delta(&f, &dom).unwrap(), delta_homogeneous(&f, &dom).unwrap());
        prop_assert!((g - h).abs() <= 1e-9 * h.abs());
    }

    #[test]
    fn power_routes_agree(c in coeffs(5), q in 2u32..6) {
        let m = integrate_power_multinomial(&c, q as f64).unwrap();
        let t = integrate_power_triangulation(&c, q as f64).unwrap();
        prop_assert!((m - t).abs() <= 1e-9 * m.abs());
    }

    #[test]
    fn envelope_dominates_at_sampled_points(
        (f, b) in instance(),
        ys in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 3), 20),
    ) {
        let env = concave_envelope(&f, &b).unwrap();
        for y in ys {
            let x: Vec<f64> = b.v0().iter().zip(&y).map(|(v, t)| v + b.u() * t).collect();
            let (e, fx) = (env.evaluate(&x).unwrap(), f.evaluate(&x).unwrap());
            prop_assert!(fx <= e + 1e-12 * e.abs().max(1.0), "f {fx} > env {e}");
        }
    }

    #[test]
    fn located_cell_contains_point(y in prop::collection::vec(0.0f64..=1.0, 1..7)) {
        prop_assert!(KuhnCell::locate(&y).contains(&y, 0.0));
    }

    #[test]
    fn spec_json_round_trips(f in family()) {
        let text = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<FunctionSpec>(&text).unwrap(), f);
    }
}
