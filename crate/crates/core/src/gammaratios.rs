//! Incomplete gamma functions, `Q` and its inverse, and the ratios
//! `R_c(u,v) = Gamma(c+u, v)/Gamma(u, v)` and `C_c(u,v) = Q(c+u, Q^-1(u, v))`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rug::ops::Pow;
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::{BigScalar, DescendingTuple, KernelMatrix, PrecisionContext};
use crate::tpcheck::SignReport;

/// Guard digits carried through every special-function evaluation.
pub const GUARD_DIGITS: u32 = 20;

/// Root-finding residual target is `10^(-digits + INVERSE_SLACK)`.
pub const INVERSE_SLACK: u32 = 15;

const MAX_TERMS: usize = 1_000_000;

fn work(ctx: &PrecisionContext) -> PrecisionContext {
    ctx.with_guard(GUARD_DIGITS)
}

fn check_shape(u: &BigScalar) -> Result<()> {
    if !u.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "gamma shape must be positive, got {u}"
        )));
    }
    Ok(())
}

fn check_point(u: &BigScalar, v: &BigScalar) -> Result<()> {
    u.same_context(v)?;
    check_shape(u)?;
    if v.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "incomplete gamma needs v >= 0, got {v}"
        )));
    }
    Ok(())
}

/// `sum_n v^n / (u (u+1) ... (u+n))`, so that `gamma(u, v) = v^u e^-v * S`.
fn lower_series(u: &Float, v: &Float, bits: u32) -> Result<Float> {
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let mut denom = u.clone();
    let mut term = Float::with_val(bits, 1) / u;
    let mut sum = term.clone();
    for _ in 0..MAX_TERMS {
        denom += 1u32;
        term *= v;
        term /= &denom;
        sum += &term;
        if Float::with_val(bits, term.abs_ref()) < Float::with_val(bits, sum.abs_ref()) * &eps {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence("incomplete gamma series".into()))
}

/// Legendre continued fraction for `Gamma(u, v) e^v v^-u`, by modified Lentz.
fn upper_fraction(u: &Float, v: &Float, bits: u32) -> Result<Float> {
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32) * 4));
    let mut b = Float::with_val(bits, v - u) + 1u32;
    let mut c = Float::with_val(bits, 1) / &tiny;
    let mut d = Float::with_val(bits, 1) / &b;
    let mut h = d.clone();
    for i in 1..MAX_TERMS {
        let an = -Float::with_val(bits, Float::with_val(bits, i as u64) - u) * i as u64;
        b += 2u32;
        d = Float::with_val(bits, &an * &d) + &b;
        if Float::with_val(bits, d.abs_ref()) < tiny {
            d = tiny.clone();
        }
        c = Float::with_val(bits, &an / &c) + &b;
        if Float::with_val(bits, c.abs_ref()) < tiny {
            c = tiny.clone();
        }
        d = Float::with_val(bits, 1) / &d;
        let delta = Float::with_val(bits, &d * &c);
        h *= &delta;
        if Float::with_val(bits, delta - 1u32).abs() < eps {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence("incomplete gamma continued fraction".into()))
}

/// `(Gamma(u, v), gamma(u, v), Gamma(u))` at working precision, each computed
/// without subtracting nearly equal quantities in its own regime.
fn gamma_parts(u: &Float, v: &Float, bits: u32) -> Result<(Float, Float, Float)> {
    let complete = Float::with_val(bits, u.gamma_ref());
    if v.is_zero() {
        return Ok((complete, Float::with_val(bits, 0), Float::with_val(bits, u.gamma_ref())));
    }
    let prefactor = Float::with_val(bits, Float::with_val(bits, u * v.clone().ln()) - v).exp();
    let split = Float::with_val(bits, u + 1u32);
    if *v < split {
        let lower = lower_series(u, v, bits)? * prefactor;
        let upper = Float::with_val(bits, &complete - &lower);
        Ok((upper, lower, complete))
    } else {
        let upper = upper_fraction(u, v, bits)? * prefactor;
        let lower = Float::with_val(bits, &complete - &upper);
        Ok((upper, lower, complete))
    }
}

/// Upper incomplete gamma `Gamma(u, v) = int_v^inf t^(u-1) e^-t dt`.
pub fn upper_gamma(u: &BigScalar, v: &BigScalar) -> Result<BigScalar> {
    check_point(u, v)?;
    let bits = work(&u.ctx()).bits();
    let (upper, _, _) = gamma_parts(
        &Float::with_val(bits, u.value()),
        &Float::with_val(bits, v.value()),
        bits,
    )?;
    Ok(u.ctx().from_float(&upper))
}

/// Lower incomplete gamma `gamma(u, v) = int_0^v t^(u-1) e^-t dt`.
pub fn lower_gamma(u: &BigScalar, v: &BigScalar) -> Result<BigScalar> {
    check_point(u, v)?;
    let bits = work(&u.ctx()).bits();
    let (_, lower, _) = gamma_parts(
        &Float::with_val(bits, u.value()),
        &Float::with_val(bits, v.value()),
        bits,
    )?;
    Ok(u.ctx().from_float(&lower))
}

fn q_float(u: &Float, v: &Float, bits: u32) -> Result<Float> {
    let (upper, _, complete) = gamma_parts(u, v, bits)?;
    Ok(upper / complete)
}

fn p_float(u: &Float, v: &Float, bits: u32) -> Result<Float> {
    let (_, lower, complete) = gamma_parts(u, v, bits)?;
    Ok(lower / complete)
}

/// `Q(u, v) = Gamma(u, v)/Gamma(u)`, the gamma survival function.
pub fn q(u: &BigScalar, v: &BigScalar) -> Result<BigScalar> {
    check_point(u, v)?;
    let bits = work(&u.ctx()).bits();
    let value = q_float(
        &Float::with_val(bits, u.value()),
        &Float::with_val(bits, v.value()),
        bits,
    )?;
    Ok(u.ctx().from_float(&value))
}

/// `P(u, v) = 1 - Q(u, v)`, the gamma distribution function.
pub fn p(u: &BigScalar, v: &BigScalar) -> Result<BigScalar> {
    check_point(u, v)?;
    let bits = work(&u.ctx()).bits();
    let value = p_float(
        &Float::with_val(bits, u.value()),
        &Float::with_val(bits, v.value()),
        bits,
    )?;
    Ok(u.ctx().from_float(&value))
}

/// Gamma density `v^(u-1) e^-v / Gamma(u)`.
fn density(u: &Float, v: &Float, bits: u32) -> Float {
    let log = Float::with_val(bits, Float::with_val(bits, u - 1u32) * v.clone().ln())
        - v
        - Float::with_val(bits, u.ln_gamma_ref());
    log.exp()
}

/// Which gamma function a root is taken of.
#[derive(Clone, Copy)]
enum Tail {
    Survival,
    Distribution,
}

/// Solve `Q(u, v) = target` (or `P(u, v) = target`) for `v`: bracket by
/// doubling, narrow by bisection, polish by safeguarded Newton.
fn invert(u: &Float, target: &Float, tail: Tail, digits: u32, bits: u32) -> Result<Float> {
    let eval = |v: &Float| -> Result<Float> {
        match tail {
            Tail::Survival => q_float(u, v, bits),
            Tail::Distribution => p_float(u, v, bits),
        }
    };
    // g(v) = value - target is increasing in v after orientation
    let oriented = |v: &Float| -> Result<Float> {
        let g = Float::with_val(bits, eval(v)? - target);
        Ok(match tail {
            Tail::Survival => -g,
            Tail::Distribution => g,
        })
    };
    let mut lo = Float::with_val(bits, 0);
    let mut hi = Float::with_val(bits, u.clone().max(&Float::with_val(bits, 1)));
    let mut guard = 0;
    while oriented(&hi)?.is_sign_negative() {
        lo = hi.clone();
        hi *= 2u32;
        guard += 1;
        if guard > 4096 {
            return Err(Error::NoConvergence("could not bracket the gamma quantile".into()));
        }
    }
    for _ in 0..64 {
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        if oriented(&mid)?.is_sign_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 16));
    let mut v = Float::with_val(bits, &lo + &hi) / 2u32;
    for _ in 0..200 {
        let g = oriented(&v)?;
        if g.is_zero() {
            break;
        }
        if g.is_sign_negative() {
            lo = v.clone();
        } else {
            hi = v.clone();
        }
        let slope = density(u, &v, bits);
        let mut next = Float::with_val(bits, &v - Float::with_val(bits, &g / &slope));
        if !next.is_finite() || next <= lo || next >= hi {
            next = Float::with_val(bits, &lo + &hi) / 2u32;
        }
        let step = Float::with_val(bits, &next - &v).abs();
        v = next;
        let scale = Float::with_val(bits, v.abs_ref()).max(&Float::with_val(bits, 1));
        if step <= Float::with_val(bits, &scale * &tol) {
            break;
        }
    }
    let residual = Float::with_val(bits, eval(&v)? - target).abs();
    let ten = Float::with_val(bits, 10);
    let limit = ten.pow(-(digits as i32) + INVERSE_SLACK as i32);
    if residual >= limit {
        return Err(Error::NoConvergence(format!(
            "gamma quantile residual {} above tolerance",
            residual.to_f64()
        )));
    }
    Ok(v)
}

fn check_probability(p: &BigScalar, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { !p.is_negative() } else { p.is_positive() };
    if !ok || *p.value() > 1 {
        return Err(Error::InvalidArgument(format!(
            "probability {p} outside the admissible range"
        )));
    }
    Ok(())
}

/// `Q^-1(u, p)`: the `v >= 0` with `Q(u, v) = p`, for `0 < p <= 1`.
pub fn q_inverse(u: &BigScalar, prob: &BigScalar) -> Result<BigScalar> {
    u.same_context(prob)?;
    check_shape(u)?;
    check_probability(prob, false)?;
    let ctx = u.ctx();
    if *prob.value() == 1 {
        return Ok(ctx.zero());
    }
    let bits = work(&ctx).bits();
    let v = invert(
        &Float::with_val(bits, u.value()),
        &Float::with_val(bits, prob.value()),
        Tail::Survival,
        ctx.digits(),
        bits,
    )?;
    Ok(ctx.from_float(&v))
}

/// `P^-1(u, p)`: the gamma quantile, for `0 <= p < 1`.
pub fn p_inverse(u: &BigScalar, prob: &BigScalar) -> Result<BigScalar> {
    u.same_context(prob)?;
    check_shape(u)?;
    check_probability(prob, true)?;
    let ctx = u.ctx();
    if prob.is_zero() {
        return Ok(ctx.zero());
    }
    if *prob.value() == 1 {
        return Err(Error::InvalidArgument("the gamma quantile of 1 is infinite".into()));
    }
    let bits = work(&ctx).bits();
    let v = invert(
        &Float::with_val(bits, u.value()),
        &Float::with_val(bits, prob.value()),
        Tail::Distribution,
        ctx.digits(),
        bits,
    )?;
    Ok(ctx.from_float(&v))
}

/// `R_c(u, v) = Gamma(c+u, v)/Gamma(u, v)`; `R_0 = 1`.
pub fn ratio_r(c: &BigScalar, u: &BigScalar, v: &BigScalar) -> Result<BigScalar> {
    c.same_context(u)?;
    check_point(u, v)?;
    if c.is_negative() {
        return Err(Error::InvalidArgument(format!("R_c needs c >= 0, got {c}")));
    }
    let ctx = u.ctx();
    if c.is_zero() {
        return Ok(ctx.one());
    }
    let bits = work(&ctx).bits();
    let uf = Float::with_val(bits, u.value());
    let vf = Float::with_val(bits, v.value());
    let cu = Float::with_val(bits, c.value() + &uf);
    let (num, _, _) = gamma_parts(&cu, &vf, bits)?;
    let (den, _, _) = gamma_parts(&uf, &vf, bits)?;
    Ok(ctx.from_float(&(num / den)))
}

/// Which of the two algebraically equal expressions to use for `C_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CRoute {
    /// `Q(c+u, Q^-1(u, v))`
    Survival,
    /// `1 - P(c+u, P^-1(u, 1-v))`
    Distribution,
}

/// `C_c(u, v)` along the chosen route. `C_c(u, 1) = 1` and, as the limit
/// `Q^-1(u, 0+) -> inf`, `C_c(u, 0) = 0`.
pub fn ratio_c_route(c: &BigScalar, u: &BigScalar, v: &BigScalar, route: CRoute) -> Result<BigScalar> {
    c.same_context(u)?;
    u.same_context(v)?;
    check_shape(u)?;
    if !c.is_positive() {
        return Err(Error::InvalidArgument(format!("C_c needs c > 0, got {c}")));
    }
    check_probability(v, true)?;
    let ctx = u.ctx();
    if v.is_zero() {
        return Ok(ctx.zero());
    }
    if *v.value() == 1 {
        return Ok(ctx.one());
    }
    let bits = work(&ctx).bits();
    let uf = Float::with_val(bits, u.value());
    let cu = Float::with_val(bits, c.value() + &uf);
    let vf = Float::with_val(bits, v.value());
    let value = match route {
        CRoute::Survival => {
            let t = invert(&uf, &vf, Tail::Survival, ctx.digits() + GUARD_DIGITS / 2, bits)?;
            q_float(&cu, &t, bits)?
        }
        CRoute::Distribution => {
            let target = Float::with_val(bits, 1u32 - &vf);
            let t = invert(&uf, &target, Tail::Distribution, ctx.digits() + GUARD_DIGITS / 2, bits)?;
            Float::with_val(bits, 1u32 - p_float(&cu, &t, bits)?)
        }
    };
    Ok(ctx.from_float(&value))
}

/// `C_c(u, v) = Q(c+u, Q^-1(u, v))`.
pub fn ratio_c(c: &BigScalar, u: &BigScalar, v: &BigScalar) -> Result<BigScalar> {
    ratio_c_route(c, u, v, CRoute::Survival)
}

fn determinant(matrix: KernelMatrix, rr_signed: bool) -> Result<(BigScalar, SignReport)> {
    let report = SignReport::from_matrix(matrix, rr_signed)?;
    let value = match report.det() {
        Some(mr) => mr.value.clone(),
        None => return Err(Error::NotSquare {
            rows: report.matrix.rows().len(),
            cols: report.matrix.cols().len(),
        }),
    };
    Ok((value, report))
}

fn same_len(a: &DescendingTuple, b: &DescendingTuple) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "tuple lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `det(R_{c_i}(u_j, v))`; strictly positive for descending tuples.
pub fn r_det(cs: &DescendingTuple, us: &DescendingTuple, v: &BigScalar) -> Result<(BigScalar, SignReport)> {
    same_len(cs, us)?;
    let m = KernelMatrix::from_fn(cs.clone(), us.clone(), |c, u| ratio_r(c, u, v))?;
    determinant(m, false)
}

/// `det(R_{c_i}(u, v_j))`; strictly positive for descending tuples.
pub fn r_det_cv(cs: &DescendingTuple, u: &BigScalar, vs: &DescendingTuple) -> Result<(BigScalar, SignReport)> {
    same_len(cs, vs)?;
    let m = KernelMatrix::from_fn(cs.clone(), vs.clone(), |c, v| ratio_r(c, u, v))?;
    determinant(m, false)
}

/// `det(R_c(u_i, v_j))` for at most three points. The 2x2 case is strictly
/// reverse-rule; the 3x3 sign is only reported.
pub fn r_det_uv(c: &BigScalar, us: &DescendingTuple, vs: &DescendingTuple) -> Result<(BigScalar, SignReport)> {
    same_len(us, vs)?;
    if us.len() > 3 {
        return Err(Error::InvalidArgument(
            "R determinants in (u, v) are supported up to order 3".into(),
        ));
    }
    let m = KernelMatrix::from_fn(us.clone(), vs.clone(), |u, v| ratio_r(c, u, v))?;
    determinant(m, true)
}

/// `det(C_{c_i}(u, v_j))`, whose sign is `(-1)^(r(r-1)/2)`.
pub fn c_det(cs: &DescendingTuple, u: &BigScalar, vs: &DescendingTuple) -> Result<(BigScalar, SignReport)> {
    same_len(cs, vs)?;
    let m = KernelMatrix::from_fn(cs.clone(), vs.clone(), |c, v| ratio_c(c, u, v))?;
    determinant(m, true)
}

/// `det(C_{c_i}(u_j, v))` for 2x2 grids, reported without a sign claim.
pub fn c_det_cu(cs: &DescendingTuple, us: &DescendingTuple, v: &BigScalar) -> Result<(BigScalar, SignReport)> {
    if cs.len() != 2 || us.len() != 2 {
        return Err(Error::Dimension(
            "the (c, u) determinant of C is defined for 2x2 grids only".into(),
        ));
    }
    let m = KernelMatrix::from_fn(cs.clone(), us.clone(), |c, u| ratio_c(c, u, v))?;
    determinant(m, false)
}

/// One sampled `det(C_c(u_i, v_j))`.
#[derive(Clone, Debug, Serialize)]
pub struct CuvSample {
    pub us: DescendingTuple,
    pub vs: DescendingTuple,
    pub det: BigScalar,
    pub report: SignReport,
}

/// Scan of `det(C_c(u_i, v_j))` over random descending grids with `u` in
/// `u_range` and `v` in `(0, 1)`. The total-positivity order of `(u, v)`
/// is unsettled, so signs are collected and nothing is asserted.
pub fn c_uv_scan(
    c: &BigScalar,
    u_range: (f64, f64),
    r: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<CuvSample>> {
    let ctx = c.ctx();
    if r == 0 || u_range.0 <= 0.0 || u_range.1 <= u_range.0 {
        return Err(Error::InvalidArgument("bad scan configuration".into()));
    }
    let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Option<DescendingTuple> {
        let mut v: Vec<f64> = (0..r).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        DescendingTuple::from_f64s(&ctx, &v).ok()
    };
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let (Some(us), Some(vs)) = (draw(&mut rng, u_range.0, u_range.1), draw(&mut rng, 0.01, 0.99))
        else {
            continue;
        };
        let m = KernelMatrix::from_fn(us.clone(), vs.clone(), |u, v| ratio_c(c, u, v))?;
        let (det, report) = determinant(m, false)?;
        out.push(CuvSample { us, vs, det, report });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::Sign;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn close(a: &BigScalar, b: &Float, rel: f64) -> bool {
        let bits = a.ctx().bits();
        let d = Float::with_val(bits, a.value() - b).abs();
        let s = Float::with_val(bits, b.abs_ref()).max(&Float::with_val(bits, 1e-300));
        (d / s).to_f64() < rel
    }

    #[test]
    fn upper_gamma_closed_forms() {
        let c = ctx();
        let e1 = c.float(-1).exp();
        assert!(close(&upper_gamma(&c.one(), &c.scalar(2.5)).unwrap(), &c.float(-2.5).exp(), 1e-115));
        assert!(close(&upper_gamma(&c.scalar(3), &c.zero()).unwrap(), &c.float(2), 1e-115));
        assert!(close(&upper_gamma(&c.scalar(2), &c.one()).unwrap(), &Float::with_val(c.bits(), &e1 * 2u32), 1e-115));
        // continued-fraction regime
        assert!(close(&upper_gamma(&c.scalar(2), &c.scalar(30)).unwrap(), &Float::with_val(c.bits(), c.float(-30).exp() * 31u32), 1e-112));
        assert!(upper_gamma(&c.zero(), &c.one()).is_err());
        assert!(upper_gamma(&c.one(), &c.scalar(-1)).is_err());
    }

    #[test]
    fn q_and_inverse() {
        let c = ctx();
        assert_eq!(q(&c.scalar(4.5), &c.zero()).unwrap(), c.one());
        let two_over_e = Float::with_val(c.bits(), c.float(-1).exp() * 2u32);
        assert!(close(&q(&c.scalar(2), &c.one()).unwrap(), &two_over_e, 1e-115));
        assert_eq!(q_inverse(&c.scalar(3), &c.one()).unwrap(), c.zero());
        let p = c.parse("0.3").unwrap();
        let v = q_inverse(&c.one(), &p).unwrap();
        assert!(close(&v, &-c.float(p.value()).ln(), 1e-110));
        let inv = q_inverse(&c.scalar(2), &c.from_float(&two_over_e)).unwrap();
        assert!(close(&inv, &c.float(1), 1e-105));
        assert!(q_inverse(&c.one(), &c.zero()).is_err());
        assert!(q_inverse(&c.one(), &c.scalar(1.5)).is_err());
    }

    #[test]
    fn ratio_r_values() {
        let c = ctx();
        assert_eq!(ratio_r(&c.zero(), &c.scalar(2), &c.one()).unwrap(), c.one());
        assert!(close(&ratio_r(&c.one(), &c.one(), &c.zero()).unwrap(), &c.float(1), 1e-115));
        assert!(close(&ratio_r(&c.one(), &c.scalar(2), &c.one()).unwrap(), &c.float(2.5), 1e-115));
    }

    #[test]
    fn ratio_c_routes_agree() {
        let c = ctx();
        let (cc, u, v) = (c.parse("3.5").unwrap(), c.scalar(4), c.parse("0.5").unwrap());
        let a = ratio_c_route(&cc, &u, &v, CRoute::Survival).unwrap();
        let b = ratio_c_route(&cc, &u, &v, CRoute::Distribution).unwrap();
        let expected = c.parse("0.947387807173915238706464073366757071036").unwrap();
        assert!(close(&a, expected.value(), 1e-38));
        assert!(close(&a, b.value(), 1e-100));
        assert_eq!(ratio_c(&cc, &u, &c.one()).unwrap(), c.one());
        assert_eq!(ratio_c(&cc, &u, &c.zero()).unwrap(), c.zero());
        assert!(ratio_c(&cc, &u, &c.scalar(1.2)).is_err());
    }

    #[test]
    fn small_determinants() {
        let c = ctx();
        let t = |v: &[f64]| DescendingTuple::from_f64s(&c, v).unwrap();
        let (d, rep) = r_det(&t(&[2.0, 1.0]), &t(&[3.0, 2.0]), &c.one()).unwrap();
        assert_eq!(rep.det().unwrap().sign, Sign::Positive);
        assert!(close(&d, c.parse("6.9").unwrap().value(), 1e-110));
        let (d, rep) = r_det_uv(&c.one(), &t(&[2.0, 1.0]), &t(&[1.0, 0.0])).unwrap();
        assert_eq!(rep.det().unwrap().sign, Sign::Negative);
        assert!(close(&d, &c.float(-1.5), 1e-110));
        assert!(r_det_uv(&c.one(), &t(&[4.0, 3.0, 2.0, 1.0]), &t(&[4.0, 3.0, 2.0, 1.0])).is_err());
        let (single, _) = r_det_uv(&c.one(), &t(&[2.0]), &t(&[1.0])).unwrap();
        assert!(close(&single, &c.float(2.5), 1e-115));
    }

    #[test]
    fn c_determinants() {
        let c = ctx();
        let t = |v: &[&str]| DescendingTuple::from_strs(&c, v).unwrap();
        let (d2, _) = c_det(&t(&["2", "1"]), &c.one(), &t(&["0.7", "0.3"])).unwrap();
        let e2 = c.parse("-0.17704953199619611525764153").unwrap();
        assert!(close(&d2, e2.value(), 1e-25));
        let (d3, rep) = c_det(&t(&["3", "2", "1"]), &c.one(), &t(&["0.8", "0.5", "0.2"])).unwrap();
        let e3 = c.parse("-0.0074759757321529757492714667").unwrap();
        assert!(close(&d3, e3.value(), 1e-25));
        assert_eq!(rep.det().unwrap().sign, Sign::Negative);
        let (dcu, _) = c_det_cu(&t(&["2", "1"]), &t(&["2", "1"]), &c.parse("0.5").unwrap()).unwrap();
        let ecu = c.parse("0.0328887789364450959519770828").unwrap();
        assert!(close(&dcu, ecu.value(), 1e-25));
        assert!(c_det_cu(&t(&["3", "2", "1"]), &t(&["3", "2", "1"]), &c.parse("0.5").unwrap()).is_err());
    }

    #[test]
    fn scan_is_reproducible() {
        let c = PrecisionContext::new(60).unwrap();
        let a = c_uv_scan(&c.one(), (0.5, 4.0), 2, 4, 9).unwrap();
        let b = c_uv_scan(&c.one(), (0.5, 4.0), 2, 4, 9).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.det, y.det);
        }
    }
}
