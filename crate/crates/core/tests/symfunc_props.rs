mod common;

use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;

use totalpos::numkernel::PrecisionContext;
use totalpos::symfunc::{
    bell_eval, bell_eval_poisson, btilde, poisson_terms_needed, power_matrix, schur, stirling2,
    Partition, StirlingTriangle,
};
use totalpos::tpcheck::{Property, SignReport};

fn ctx() -> PrecisionContext {
    PrecisionContext::new(60).unwrap()
}

#[test]
fn stirling_counts_set_partitions() {
    let tri = StirlingTriangle::new(9);
    for n in 0..=9 {
        for k in 0..=n {
            let want = common::set_partitions(n, k);
            assert_eq!(stirling2(n, k), want, "S({n},{k})");
            assert_eq!(tri.get(n, k), want, "S({n},{k})");
        }
    }
}

#[test]
fn schur_coefficients_are_tableau_counts() {
    for m in 1..=4 {
        for w in 0..=5 {
            for theta in common::partitions_exact(w, m) {
                let sym = common::schur_symbolic(&theta);
                assert_eq!(sym, common::schur_tableaux(&theta, m), "{theta:?}");
                assert!(sym.values().all(|c| *c >= 0));
            }
        }
    }
}

#[test]
fn schur_small_shapes() {
    let ctx = ctx();
    let t: Vec<_> = ["3", "2", "1"].iter().map(|s| ctx.parse(s).unwrap()).collect();
    // s_(1,0,0) = e_1 and s_(1,1,1) = e_3
    let e1 = schur(&Partition::new(vec![1, 0, 0]).unwrap(), &t).unwrap();
    let e3 = schur(&Partition::new(vec![1, 1, 1]).unwrap(), &t).unwrap();
    assert_eq!(e1.to_f64(), 6.0);
    assert_eq!(e3.to_f64(), 6.0);
    // s_(2,0,0) = h_2 = sum over multisets of size two = 25
    let h2 = schur(&Partition::new(vec![2, 0, 0]).unwrap(), &t).unwrap();
    assert!((h2.to_f64() - 25.0).abs() < 1e-40);
}

#[test]
fn schur_rejects_coincident_arguments() {
    let ctx = ctx();
    let t = vec![ctx.parse("2").unwrap(), ctx.parse("2").unwrap()];
    assert!(schur(&Partition::new(vec![1, 0]).unwrap(), &t).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bell_matches_poisson_moment(k in 0usize..=12, milli in 100u32..10000) {
        let ctx = ctx();
        let u = ctx.parse(&format!("{}.{:03}", milli / 1000, milli % 1000)).unwrap();
        let exact = bell_eval(k, &u);
        let terms = poisson_terms_needed(k, u.to_f64(), ctx.digits());
        let series = bell_eval_poisson(k, &u, terms).unwrap();
        prop_assert!(common::rel_diff(series.value(), exact.value()) < 1e-50);
    }

    #[test]
    fn btilde_is_scaled_bell(k in 0usize..=12, milli in 100u32..5000) {
        let ctx = ctx();
        let bits = ctx.bits();
        let lam = ctx.parse(&format!("{}.{:03}", milli / 1000, milli % 1000)).unwrap();
        let inv = ctx.from_float(&Float::with_val(bits, lam.value().recip_ref()));
        let want = Float::with_val(bits, bell_eval(k, &inv).value() * Float::with_val(bits, lam.value().pow(k as u32)));
        prop_assert!(common::rel_diff(btilde(k, &lam).unwrap().value(), &want) < 1e-50);
    }

    #[test]
    fn schur_bialternant_matches_symbolic(
        theta in (1usize..=3).prop_flat_map(|m| (Just(m), 0u32..=6)).prop_flat_map(|(m, w)| {
            let all = common::partitions_exact(w, m);
            prop::sample::select(all)
        }),
        seed in any::<u64>(),
    ) {
        use rand::SeedableRng;
        let ctx = ctx();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let t: Vec<_> = common::descending_decimals(&mut rng, theta.len(), 0.05, 4.0, 3)
            .iter()
            .map(|s| ctx.parse(s).unwrap())
            .collect();
        let tf: Vec<Float> = t.iter().map(|v| v.value().clone()).collect();
        let exact = common::poly_eval(&common::schur_symbolic(&theta), &tf, ctx.bits() + 64);
        let got = schur(&Partition::new(theta.clone()).unwrap(), &t).unwrap();
        prop_assert!(common::rel_diff(got.value(), &exact) < 1e-45);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn power_matrix_is_stp(r in 1usize..=5, seed in any::<u64>()) {
        use rand::SeedableRng;
        let ctx = ctx();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ls = common::descending_decimals(&mut rng, r, 0.1, 5.0, 2);
        let xs = common::descending_decimals(&mut rng, r, -3.0, 3.0, 2);
        let l = common::tuple(&ctx, &ls);
        let x = common::tuple(&ctx, &xs);
        let report = SignReport::from_matrix(power_matrix(&l, &x).unwrap(), false).unwrap();
        prop_assert!(report.satisfies(Property::Stp), "l={:?} x={:?}", ls, xs);
    }
}
