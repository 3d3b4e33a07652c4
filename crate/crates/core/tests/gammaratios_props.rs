mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use totalpos::gammaratios::{
    c_det, p, q, q_inverse, r_det, r_det_cv, r_det_uv, ratio_c_route, upper_gamma, CRoute,
};
use totalpos::numkernel::PrecisionContext;
use totalpos::tpcheck::Property;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(60).unwrap()
}

fn dec(thousandths: u32) -> String {
    format!("{}.{:03}", thousandths / 1000, thousandths % 1000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upper_gamma_matches_mpfr(u in 50u32..30000, v in 10u32..50000) {
        let ctx = ctx();
        let (u, v) = (ctx.parse(&dec(u)).unwrap(), ctx.parse(&dec(v)).unwrap());
        let oracle = Float::with_val(ctx.bits() + 64, u.value()).gamma_inc(v.value());
        let got = upper_gamma(&u, &v).unwrap();
        prop_assert!(common::rel_diff(got.value(), &oracle) < 1e-50);
    }

    #[test]
    fn p_and_q_sum_to_one(u in 50u32..30000, v in 10u32..50000) {
        let ctx = ctx();
        let (u, v) = (ctx.parse(&dec(u)).unwrap(), ctx.parse(&dec(v)).unwrap());
        let s = Float::with_val(ctx.bits(), p(&u, &v).unwrap().value() + q(&u, &v).unwrap().value());
        prop_assert!(Float::with_val(ctx.bits(), s - 1u32).abs() < 1e-55);
    }

    #[test]
    fn inverse_decreases_in_probability(u in 50u32..20000, a in 1u32..999, b in 1u32..999) {
        prop_assume!(a != b);
        let ctx = ctx();
        let u = ctx.parse(&dec(u)).unwrap();
        let (hi, lo) = (a.max(b), a.min(b));
        let x_hi = q_inverse(&u, &ctx.parse(&format!("0.{hi:03}")).unwrap()).unwrap();
        let x_lo = q_inverse(&u, &ctx.parse(&format!("0.{lo:03}")).unwrap()).unwrap();
        prop_assert!(x_hi.value() < x_lo.value());
    }

    #[test]
    fn c_routes_agree(c in 50u32..6000, u in 50u32..6000, v in 1u32..999) {
        let ctx = ctx();
        let (c, u) = (ctx.parse(&dec(c)).unwrap(), ctx.parse(&dec(u)).unwrap());
        let v = ctx.parse(&format!("0.{v:03}")).unwrap();
        let a = ratio_c_route(&c, &u, &v, CRoute::Survival).unwrap();
        let b = ratio_c_route(&c, &u, &v, CRoute::Distribution).unwrap();
        prop_assert!(common::rel_diff(a.value(), b.value()) < 1e-40);
    }
}

#[test]
fn r_in_c_and_u_is_stp() {
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let r = rng.gen_range(2..=3);
        let cs = common::tuple(&ctx, &common::descending_decimals(&mut rng, r, 0.1, 6.0, 3));
        let us = common::tuple(&ctx, &common::descending_decimals(&mut rng, r, 0.1, 6.0, 3));
        let v = ctx.parse(&common::decimal(&mut rng, 0.05, 8.0, 3)).unwrap();
        let (_, report) = r_det(&cs, &us, &v).unwrap();
        assert!(report.satisfies(Property::Stp), "{:?}", report.worst(Property::Stp));
    }
}

#[test]
fn r_in_c_and_v_is_stp() {
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..60 {
        let r = rng.gen_range(2..=3);
        let cs = common::tuple(&ctx, &common::descending_decimals(&mut rng, r, 0.1, 6.0, 3));
        let vs = common::tuple(&ctx, &common::descending_decimals(&mut rng, r, 0.05, 8.0, 3));
        let u = ctx.parse(&common::decimal(&mut rng, 0.1, 6.0, 3)).unwrap();
        let (_, report) = r_det_cv(&cs, &u, &vs).unwrap();
        assert!(report.satisfies(Property::Stp), "{:?}", report.worst(Property::Stp));
    }
}

#[test]
fn r_in_u_and_v_is_reverse_rule_at_order_two() {
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..60 {
        let us = common::tuple(&ctx, &common::descending_decimals(&mut rng, 2, 0.1, 6.0, 3));
        let vs = common::tuple(&ctx, &common::descending_decimals(&mut rng, 2, 0.05, 8.0, 3));
        let c = ctx.parse(&common::decimal(&mut rng, 0.1, 6.0, 3)).unwrap();
        let (d, report) = r_det_uv(&c, &us, &vs).unwrap();
        assert!(d.is_negative());
        assert!(report.satisfies(Property::Srr));
    }
}

#[test]
fn c_in_c_and_v_is_reverse_rule() {
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..40 {
        let r = rng.gen_range(2..=3);
        let cs = common::tuple(&ctx, &common::descending_decimals(&mut rng, r, 0.1, 6.0, 3));
        let vs = common::tuple(&ctx, &common::descending_decimals(&mut rng, r, 0.01, 0.99, 3));
        let u = ctx.parse(&common::decimal(&mut rng, 0.1, 6.0, 3)).unwrap();
        let (_, report) = c_det(&cs, &u, &vs).unwrap();
        assert!(report.satisfies(Property::Srr), "{:?}", report.worst(Property::Srr));
    }
}

#[test]
fn r_det_rejects_long_uv_grids() {
    let ctx = ctx();
    let t = |v: &[&str]| totalpos::numkernel::DescendingTuple::from_strs(&ctx, v).unwrap();
    let res = r_det_uv(&ctx.one(), &t(&["4", "3", "2", "1"]), &t(&["4", "3", "2", "1"]));
    assert!(res.is_err());
}
