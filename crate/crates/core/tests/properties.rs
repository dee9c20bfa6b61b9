mod common;

use mopuc::cd::{self, LatticePath, PathKind};
use mopuc::{
    coeffs, make_path, run_suite, ComplexFloat, GaussianRational, MeasureSpec, MeasureSystem, MopucSystem, MultiIndex,
    parse_system, Poly, Scalar, TolerancePolicy,
};
use proptest::prelude::*;

type G = GaussianRational;

fn gaussian() -> impl Strategy<Value = G> {
    (-12i64..=12, -12i64..=12, 1i64..=6).prop_map(|(a, b, d)| G::gaussian((a, d), (b, d)))
}

fn poly() -> impl Strategy<Value = Poly<G>> {
    prop::collection::vec(gaussian(), 0..6).prop_map(Poly::from_coeffs)
}

/// Bernstein-Szego parameter `(x + iy)/8` inside the disc of radius 3/4.
fn bs_param() -> impl Strategy<Value = G> {
    (-6i64..=6, -6i64..=6)
        .prop_filter("|a| <= 3/4", |(x, y)| x * x + y * y <= 36)
        .prop_map(|(x, y)| G::gaussian((x, 8), (y, 8)))
}

fn measure() -> impl Strategy<Value = MeasureSpec<G>> {
    prop_oneof![
        bs_param().prop_map(MeasureSpec::bernstein_szego),
        prop::collection::vec((-2i64..=2, -2i64..=2), 1..=3).prop_map(|cs| {
            let given = cs
                .into_iter()
                .enumerate()
                .map(|(k, (x, y))| (k as i64 + 1, G::gaussian((x, 16), (y, 16))));
            MeasureSpec::trig_density(given, &TolerancePolicy::default()).unwrap()
        }),
    ]
}

fn system(specs: Vec<MeasureSpec<G>>) -> MopucSystem<G> {
    let policy = TolerancePolicy::default();
    MopucSystem::new(MeasureSystem::new(specs, &policy).unwrap(), policy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identities_hold_exactly(specs in prop::collection::vec(measure(), 2..=3)) {
        let sys = system(specs);
        let indices = MultiIndex::simplex(sys.r(), if sys.r() == 2 { 4 } else { 3 });
        let rep = run_suite(&sys, &indices).unwrap();
        prop_assert_eq!(rep.failed(), 0, "{:?}", rep.failures().next());
        prop_assert!(rep.passed() > 0);
    }

    #[test]
    fn sum_rule_wherever_defined(specs in prop::collection::vec(measure(), 2..=3)) {
        let sys = system(specs);
        for n in MultiIndex::simplex(sys.r(), 3) {
            if let Ok(c) = coeffs(&sys, &n) {
                prop_assert_eq!(c.alpha.clone() * c.beta.clone() + c.rho_sum(), <G as Scalar>::one());
            }
        }
    }

    #[test]
    fn cd_on_admissible_paths(specs in prop::collection::vec(measure(), 2..=3), len in 1usize..=4, seed in 0u64..1000) {
        let sys = system(specs);
        if let Ok(path) = cd::random_admissible_path(&sys, len, seed) {
            let pts: Vec<G> = cd::random_points(seed, 2);
            let ev = cd::cd_check(&sys, &path, &pts[0], &pts[1]).unwrap();
            prop_assert!(ev.pass);
            prop_assert!(cd::cd_bivariate(&sys, &path).unwrap().agree());
        }
    }

    #[test]
    fn inner_product_is_hermitian(a in bs_param(), f in poly(), g in poly()) {
        let sys = system(vec![MeasureSpec::bernstein_szego(a)]);
        let fg = sys.inner(0, &f, &g).unwrap();
        let gf = sys.inner(0, &g, &f).unwrap();
        prop_assert_eq!(fg, Scalar::conj(&gf));
        let ff = sys.inner(0, &f, &f).unwrap();
        prop_assert!(ff.to_c64().im == 0.0 && ff.to_c64().re >= 0.0);
    }

    #[test]
    fn poly_evaluation(f in poly(), g in poly(), w in gaussian()) {
        prop_assert_eq!(f.eval_conj(&w), Scalar::conj(&f.eval(&w)));
        prop_assert_eq!(f.mul(&g).eval(&w), f.eval(&w) * g.eval(&w));
        prop_assert_eq!((&f + &g).eval(&w), f.eval(&w) + g.eval(&w));
        prop_assert_eq!(f.mul_z().eval(&w), w.clone() * f.eval(&w));
    }

    #[test]
    fn graded_order(r in 1usize..=3, total in 0usize..=6) {
        let all = MultiIndex::simplex(r, total);
        prop_assert!(all.windows(2).all(|w| w[0].norm() <= w[1].norm()));
        for n in &all {
            for k in 0..r {
                prop_assert_eq!(n.plus(k).minus(k), Some(n.clone()));
            }
        }
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), all.len());
    }

    #[test]
    fn random_paths_are_monotone(r in 1usize..=4, len in 1usize..=10, seed in any::<u64>()) {
        let p = make_path(&PathKind::Random(seed), r, len).unwrap();
        prop_assert_eq!(p.indices().len(), len + 1);
        for (k, n) in p.indices().iter().enumerate() {
            prop_assert_eq!(n.norm(), k);
        }
        prop_assert_eq!(&p, &LatticePath::from_steps(r, p.steps().to_vec()).unwrap());
    }

    #[test]
    fn float_determinant_tracks_exact(specs in prop::collection::vec(measure(), 2..=2)) {
        let exact = system(specs.clone());
        let policy = TolerancePolicy::default();
        // round-trip through the system schema
        let text = serde_json::json!({ "measures": specs.iter().map(MeasureSpec::to_json).collect::<Vec<_>>() });
        let float: MopucSystem<ComplexFloat> =
            MopucSystem::new(parse_system(&text.to_string(), &policy).unwrap(), policy);
        for n in MultiIndex::simplex(2, 4).into_iter().skip(1) {
            let (_, de) = exact.is_normal(&n).unwrap();
            let (_, df) = float.is_normal(&n).unwrap();
            prop_assert!((de.det.to_c64() - df.det).norm() <= 1e-12);
        }
    }
}

#[test]
fn corpus_is_reproducible() {
    assert_eq!(common::corpus(5, 1), common::corpus(5, 1));
    assert_ne!(common::corpus(5, 1), common::corpus(5, 2));
}
