//! Catalog of premium weight functions `w(lambda, x)`.
//!
//! Each family carries its validity domain; evaluation outside it is an
//! error rather than a NaN so that determinant sign scans never see garbage.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{BigScalar, PrecisionContext};

/// Extra bits carried through closed-form evaluation before rounding back.
const EVAL_GUARD_BITS: u32 = 64;

/// Increasing transform `F` used by the Aumann-Shapley kernel `exp(lambda F(x))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Log1p,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `e^(lambda x)`
    Esscher,
    /// `exp(lambda F(x))`
    AumannShapley(Transform),
    /// `lambda^x`
    SizeBiased,
    /// `1(x > lambda)`
    Cte,
    /// `1 - e^(-x/lambda)`
    Kamps,
    /// `k! [1 - e^(-x/lambda) sum_{j<=k} (x/lambda)^j / j!]`
    KampsK(u32),
    /// `exp(f(lambda, x)) - e^x + 1` with `f = (e^(lambda x) - 1)/lambda`
    PseudoPoisson,
    /// `exp(((1+x)^lambda - 1)/lambda) - x`
    PseudoPoissonRaw,
    /// `((1+lambda)^x - 1)/(lambda x)`
    W5,
    /// `lambda x / log(1 + lambda x)`
    W6,
    /// `log(1+lambda+x)/(lambda+x) * x/log(1+x)`
    W7,
}

/// Allowed range of one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Real,
    Positive,
    NonNegative,
}

impl Bound {
    fn admits(self, v: &Float) -> bool {
        match self {
            Bound::Real => v.is_finite(),
            Bound::Positive => v.is_finite() && v.cmp0() == Some(std::cmp::Ordering::Greater),
            Bound::NonNegative => v.is_finite() && v.cmp0() != Some(std::cmp::Ordering::Less),
        }
    }
}

/// Validity domain of a family, plus the sub-region (if any) on which the
/// family is strictly totally positive of every order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lambda: Bound,
    pub x: Bound,
    /// `Some(b)`: the strictly-totally-positive region is `lambda * x < b`.
    pub stp_product_below: Option<f64>,
}

impl Domain {
    pub fn contains(&self, lambda: &Float, x: &Float) -> bool {
        self.lambda.admits(lambda) && self.x.admits(x)
    }
}

/// A weight family plus its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightFunctionSpec {
    pub family: Family,
}

impl WeightFunctionSpec {
    pub fn new(family: Family) -> Self {
        WeightFunctionSpec { family }
    }

    /// Look up a family by its stable name. `k` is only used by `w3_k`.
    pub fn from_name(name: &str, k: Option<u32>) -> Result<Self> {
        let family = match name {
            "w1" | "esscher" => Family::Esscher,
            "w1_tilde" | "w1_tilde_log1p" => Family::AumannShapley(if name == "w1_tilde" {
                Transform::Identity
            } else {
                Transform::Log1p
            }),
            "size_biased" => Family::SizeBiased,
            "w2" | "cte" => Family::Cte,
            "w3" | "kamps" => Family::Kamps,
            "w3_k" => Family::KampsK(k.ok_or_else(|| {
                Error::InvalidArgument("w3_k needs the order parameter k".into())
            })?),
            "w4" => Family::PseudoPoisson,
            "w4_tilde" => Family::PseudoPoissonRaw,
            "w5" => Family::W5,
            "w6" => Family::W6,
            "w7" => Family::W7,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown weight family '{other}'"
                )))
            }
        };
        Ok(WeightFunctionSpec { family })
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::Esscher => "w1".into(),
            Family::AumannShapley(Transform::Identity) => "w1_tilde".into(),
            Family::AumannShapley(Transform::Log1p) => "w1_tilde_log1p".into(),
            Family::SizeBiased => "size_biased".into(),
            Family::Cte => "w2".into(),
            Family::Kamps => "w3".into(),
            Family::KampsK(k) => format!("w3_{k}"),
            Family::PseudoPoisson => "w4".into(),
            Family::PseudoPoissonRaw => "w4_tilde".into(),
            Family::W5 => "w5".into(),
            Family::W6 => "w6".into(),
            Family::W7 => "w7".into(),
        }
    }

    pub fn domain(&self) -> Domain {
        let positive = Domain {
            lambda: Bound::Positive,
            x: Bound::Positive,
            stp_product_below: None,
        };
        match self.family {
            Family::Esscher | Family::Cte => Domain {
                lambda: Bound::Real,
                x: Bound::Real,
                stp_product_below: None,
            },
            // lambda = 0 is the right-continuous splice w4(0, x) = 1
            Family::PseudoPoisson => Domain {
                lambda: Bound::NonNegative,
                ..positive
            },
            Family::W6 => Domain {
                stp_product_below: Some(1.0),
                ..positive
            },
            _ => positive,
        }
    }

    /// True for the indicator kernel, whose values are exactly 0 or 1.
    pub fn is_indicator(&self) -> bool {
        self.family == Family::Cte
    }
}

impl fmt::Display for WeightFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for WeightFunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(k) = s.strip_prefix("w3_").and_then(|k| k.parse::<u32>().ok()) {
            return Ok(WeightFunctionSpec::new(Family::KampsK(k)));
        }
        WeightFunctionSpec::from_name(s, None)
    }
}

fn domain_error(spec: &WeightFunctionSpec, lambda: &BigScalar, x: &BigScalar) -> Error {
    Error::Domain {
        family: spec.name(),
        lambda: lambda.to_decimal(20),
        x: x.to_decimal(20),
    }
}

/// Evaluate `w(lambda, x)` at the precision of the arguments.
pub fn eval(spec: &WeightFunctionSpec, lambda: &BigScalar, x: &BigScalar) -> Result<BigScalar> {
    lambda.same_context(x)?;
    let ctx = lambda.ctx();
    if !spec.domain().contains(lambda.value(), x.value()) {
        return Err(domain_error(spec, lambda, x));
    }
    let bits = ctx.bits() + EVAL_GUARD_BITS;
    let l = Float::with_val(bits, lambda.value());
    let xv = Float::with_val(bits, x.value());
    let value = match spec.family {
        Family::Esscher => Float::with_val(bits, &l * &xv).exp(),
        Family::AumannShapley(t) => {
            let fx = match t {
                Transform::Identity => xv,
                Transform::Log1p => xv.ln_1p(),
            };
            Float::with_val(bits, &l * &fx).exp()
        }
        Family::SizeBiased => l.pow(&xv),
        Family::Cte => {
            if xv > l {
                Float::with_val(bits, 1)
            } else {
                Float::with_val(bits, 0)
            }
        }
        Family::Kamps => kamps_k(0, &l, &xv, bits),
        Family::KampsK(k) => kamps_k(k, &l, &xv, bits),
        Family::PseudoPoisson => {
            if l.is_zero() {
                Float::with_val(bits, 1)
            } else {
                let f = f_lambda_x_float(&l, &xv, ctx.digits(), bits).exp();
                f - xv.exp() + 1u32
            }
        }
        Family::PseudoPoissonRaw => {
            let inner = Float::with_val(bits, &l * xv.clone().ln_1p()).exp_m1() / &l;
            inner.exp() - xv
        }
        Family::W5 => {
            let num = Float::with_val(bits, &xv * l.clone().ln_1p()).exp_m1();
            num / (l * xv)
        }
        Family::W6 => w6_closed_float(Float::with_val(bits, &l * &xv)),
        Family::W7 => {
            let s = Float::with_val(bits, &l + &xv);
            let left = Float::with_val(bits, s.clone().ln_1p() / &s);
            let right = Float::with_val(bits, &xv / xv.clone().ln_1p());
            left * right
        }
    };
    Ok(ctx.from_float(&value))
}

/// `f(lambda, x) = (e^(lambda x) - 1)/lambda`, with `f(0, x) = x`.
pub fn f_lambda_x(lambda: &BigScalar, x: &BigScalar) -> Result<BigScalar> {
    lambda.same_context(x)?;
    let ctx = lambda.ctx();
    let bits = ctx.bits() + EVAL_GUARD_BITS;
    let l = Float::with_val(bits, lambda.value());
    let xv = Float::with_val(bits, x.value());
    Ok(ctx.from_float(&f_lambda_x_float(&l, &xv, ctx.digits(), bits)))
}

fn f_lambda_x_float(l: &Float, x: &Float, digits: u32, bits: u32) -> Float {
    if l.is_zero() {
        return Float::with_val(bits, x);
    }
    let u = Float::with_val(bits, l * x);
    let small = Float::with_val(bits, 10).pow(-((digits / 4) as i32));
    if Float::with_val(bits, u.abs_ref()) < small {
        // x * sum_{n>=0} u^n/(n+1)!
        let eps = Float::with_val(bits, 1) >> bits;
        let mut term = Float::with_val(bits, 1);
        let mut sum = Float::with_val(bits, 1);
        let mut n = 1u32;
        loop {
            term *= &u;
            term /= n + 1;
            sum += &term;
            if Float::with_val(bits, term.abs_ref()) < eps {
                break;
            }
            n += 1;
        }
        return sum * x;
    }
    u.exp_m1() / l
}

fn kamps_k(k: u32, l: &Float, x: &Float, bits: u32) -> Float {
    let y = Float::with_val(bits, x / l);
    let fact = Float::with_val(bits, Integer::from(Integer::factorial(k)));
    let eps = Float::with_val(bits, 1) >> (bits + 8);
    if y < k + 1 {
        // k! e^-y sum_{j>k} y^j/j!: all terms positive, no cancellation
        let mut term = Float::with_val(bits, 1);
        for j in 1..=k + 1 {
            term *= &y;
            term /= j;
        }
        let mut sum = Float::with_val(bits, 0);
        let mut j = k + 1;
        loop {
            sum += &term;
            j += 1;
            term *= &y;
            term /= j;
            if term < Float::with_val(bits, &sum * &eps) {
                break;
            }
        }
        fact * sum * (-y).exp()
    } else {
        let mut term = Float::with_val(bits, 1);
        let mut sum = Float::with_val(bits, 1);
        for j in 1..=k {
            term *= &y;
            term /= j;
            sum += &term;
        }
        let tail = sum * Float::with_val(bits, -&y).exp();
        fact * (Float::with_val(bits, 1) - tail)
    }
}

/// Truncated-exponential kernel `w_{3,k}`; `w_{3,0}` is the Kamps kernel.
pub fn eval_w3k(k: u32, lambda: &BigScalar, x: &BigScalar) -> Result<BigScalar> {
    eval(&WeightFunctionSpec::new(Family::KampsK(k)), lambda, x)
}

fn w6_closed_float(u: Float) -> Float {
    if u.is_zero() {
        return Float::with_val(u.prec(), 1);
    }
    let denom = u.clone().ln_1p();
    u / denom
}

/// `u / log(1+u)` as a function of the product `u = lambda x >= 0`, with the
/// removable singularity at `u = 0` filled by its limit 1.
pub fn w6_of_product(u: &BigScalar) -> Result<BigScalar> {
    if u.is_negative() {
        return Err(Error::InvalidArgument(
            "w6 product argument must be nonnegative".into(),
        ));
    }
    let ctx = u.ctx();
    let bits = ctx.bits() + EVAL_GUARD_BITS;
    Ok(ctx.from_float(&w6_closed_float(Float::with_val(bits, u.value()))))
}

/// `theta_0..theta_{n-1}` with `theta_k = (1/k!) int_0^1 t(1-t)(2-t)...(k-1-t) dt`,
/// computed exactly. All values are strictly positive.
///
/// These are the magnitudes of the Taylor coefficients of `u/log(1+u)`; the
/// coefficients themselves alternate in sign from `k = 2` on, see
/// [`w6_series_coefficients`].
pub fn w6_thetas(n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n);
    // coefficients of the product polynomial in t, lowest degree first
    let mut poly: Vec<Integer> = vec![Integer::from(1)];
    let mut fact = Integer::from(1);
    for k in 0..n {
        if k == 1 {
            poly = vec![Integer::new(), Integer::from(1)];
        } else if k >= 2 {
            // multiply by (k-1-t)
            let c = Integer::from(k as u64 - 1);
            let mut next = vec![Integer::new(); poly.len() + 1];
            for (i, a) in poly.iter().enumerate() {
                next[i] += Integer::from(a * &c);
                next[i + 1] -= a;
            }
            poly = next;
        }
        if k >= 1 {
            fact *= k as u64;
        }
        let mut integral = Rational::new();
        for (i, a) in poly.iter().enumerate() {
            integral += Rational::from((a.clone(), Integer::from(i as u64 + 1)));
        }
        out.push(integral / Rational::from(fact.clone()));
    }
    out
}

pub fn w6_theta(k: usize) -> Rational {
    w6_thetas(k + 1).pop().expect("at least one coefficient")
}

/// Taylor coefficients of `u/log(1+u) = sum c_k u^k`, i.e.
/// `c_k = int_0^1 binom(t, k) dt = (-1)^(k+1) theta_k` for `k >= 1`, `c_0 = 1`.
pub fn w6_series_coefficients(n: usize) -> Vec<Rational> {
    w6_thetas(n)
        .into_iter()
        .enumerate()
        .map(|(k, t)| if k >= 2 && k % 2 == 0 { -t } else { t })
        .collect()
}

/// Partial sum of the power series of `w6` in the product `u = lambda x`,
/// valid for `0 <= u < 1`.
pub fn w6_series_of_product(u: &BigScalar, terms: usize) -> Result<BigScalar> {
    let ctx = u.ctx();
    if u.is_negative() || *u.value() >= 1 {
        return Err(Error::InvalidArgument(
            "w6 series needs 0 <= lambda x < 1".into(),
        ));
    }
    let bits = ctx.bits() + EVAL_GUARD_BITS;
    let uv = Float::with_val(bits, u.value());
    let mut power = Float::with_val(bits, 1);
    let mut sum = Float::with_val(bits, 0);
    for coef in w6_series_coefficients(terms) {
        sum += Float::with_val(bits, &coef) * &power;
        power *= &uv;
    }
    Ok(ctx.from_float(&sum))
}

/// Partial sum `sum_{k<terms} c_k lambda^k x^k` of the Taylor series of `w6`.
pub fn w6_series_eval(lambda: &BigScalar, x: &BigScalar, terms: usize) -> Result<BigScalar> {
    lambda.same_context(x)?;
    if !lambda.is_positive() || !x.is_positive() {
        return Err(Error::Domain {
            family: "w6 series".into(),
            lambda: lambda.to_decimal(20),
            x: x.to_decimal(20),
        });
    }
    let u = lambda.checked_mul(x)?;
    w6_series_of_product(&u, terms)
}

/// Number of series terms after which the tail bound `u^n / (1-u)` drops
/// below `10^(-digits/2)`.
pub fn w6_terms_needed(u: f64, ctx: &PrecisionContext) -> usize {
    assert!((0.0..1.0).contains(&u));
    if u == 0.0 {
        return 1;
    }
    let target = -(ctx.digits() as f64 / 2.0) * std::f64::consts::LN_10;
    let n = (target + (1.0 - u).ln()) / u.ln();
    n.ceil().max(1.0) as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn w(name: &str, l: &str, x: &str) -> Result<BigScalar> {
        let c = ctx();
        eval(
            &WeightFunctionSpec::from_name(name, Some(2)).unwrap(),
            &c.parse(l).unwrap(),
            &c.parse(x).unwrap(),
        )
    }

    fn close(a: &BigScalar, b: &Float, tol: f64) -> bool {
        let d = Float::with_val(a.ctx().bits(), a.value() - b).abs();
        d.to_f64() <= tol * b.to_f64().abs().max(1e-300)
    }

    #[test]
    fn esscher_at_zero_loading() {
        assert_eq!(w("w1", "0", "7").unwrap(), ctx().one());
    }

    #[test]
    fn cte_is_an_exact_indicator() {
        assert_eq!(w("w2", "2", "3").unwrap(), ctx().one());
        assert_eq!(w("w2", "3", "2").unwrap(), ctx().zero());
        assert_eq!(w("w2", "2", "2").unwrap(), ctx().zero());
    }

    #[test]
    fn kamps_half() {
        let c = ctx();
        let ln2 = c.scalar(c.float(2).ln());
        let v = eval(&WeightFunctionSpec::new(Family::Kamps), &c.one(), &ln2).unwrap();
        assert!(close(&v, &c.float(0.5), 1e-115));
    }

    #[test]
    fn w6_at_e_minus_one() {
        let c = ctx();
        let em1 = c.scalar(c.float(1).exp_m1());
        let v = eval(&WeightFunctionSpec::new(Family::W6), &c.one(), &em1).unwrap();
        assert!(close(&v, em1.value(), 1e-115));
    }

    #[test]
    fn domains_are_enforced() {
        assert!(matches!(w("w3", "0", "1"), Err(Error::Domain { .. })));
        assert!(matches!(w("w6", "1", "-1"), Err(Error::Domain { .. })));
        assert!(matches!(w("w5", "-1", "1"), Err(Error::Domain { .. })));
        assert!(w("w1", "-3", "-2").is_ok());
        assert!(w("w2", "-3", "-2").is_ok());
    }

    #[test]
    fn pseudo_poisson_splice_at_zero() {
        for x in ["0.1", "1", "7.5", "40"] {
            assert_eq!(w("w4", "0", x).unwrap(), ctx().one());
        }
        // f(lambda, x) >= x, so w4 >= 1 for lambda > 0
        assert!(w("w4", "0.3", "2").unwrap().value() > &1);
    }

    #[test]
    fn f_is_right_continuous_at_zero() {
        let c = ctx();
        let x = c.parse("1.7").unwrap();
        assert_eq!(f_lambda_x(&c.zero(), &x).unwrap(), x);
        // Taylor branch and expm1 branch agree across the switch-over
        for l in ["1e-40", "1e-29", "1e-31", "1e-10"] {
            let lam = c.parse(l).unwrap();
            let got = f_lambda_x(&lam, &x).unwrap();
            let bits = c.bits() * 2;
            let lb = Float::with_val(bits, lam.value());
            let xb = Float::with_val(bits, x.value());
            let reference = Float::with_val(bits, &lb * &xb).exp_m1() / lb;
            assert!(close(&got, &reference, 1e-115), "lambda = {l}");
        }
    }

    #[test]
    fn w3k_reduces_to_kamps() {
        let c = ctx();
        for (l, x) in [("0.5", "0.2"), ("2", "7"), ("1", "1"), ("3.3", "0.01")] {
            let a = eval_w3k(0, &c.parse(l).unwrap(), &c.parse(x).unwrap()).unwrap();
            let b = w("w3", l, x).unwrap();
            let d = Float::with_val(c.bits(), a.value() - b.value()).abs();
            assert!(d.to_f64() < 1e-115 * b.to_f64());
        }
    }

    #[test]
    fn w3k_k2_closed_value() {
        let c = ctx();
        let v = eval_w3k(2, &c.one(), &c.one()).unwrap();
        let e_inv = c.float(-1).exp();
        let expected = (c.float(1) - e_inv * c.float(2.5)) * 2u32;
        assert!(close(&v, &expected, 1e-115));
        // large x: tail vanishes, value tends to k!
        let big = eval_w3k(1, &c.one(), &c.parse("400").unwrap()).unwrap();
        assert!(close(&big, &c.float(1), 1e-115));
    }

    #[test]
    fn theta_values() {
        assert_eq!(w6_theta(0), Rational::from(1));
        assert_eq!(w6_theta(1), Rational::from((1, 2)));
        assert_eq!(w6_theta(2), Rational::from((1, 12)));
        assert!(w6_thetas(40).iter().all(|t| *t > 0));
    }

    #[test]
    fn theta2_matches_finite_difference() {
        // second derivative of u/log(1+u) at 0, halved
        let c = ctx();
        let h = c.pow10_neg(20);
        let f = |u: Float| w6_closed_float(u);
        let bits = c.bits();
        let f0 = f(Float::with_val(bits, 0));
        let fp = f(Float::with_val(bits, &h));
        let f2 = f(Float::with_val(bits, &h * 2u32));
        // forward difference, error O(h)
        let second = (f2 - fp * 2u32 + f0) / Float::with_val(bits, h.square_ref());
        let c2 = second / 2u32;
        assert!((c2.to_f64() + 1.0 / 12.0).abs() < 1e-15);
        let signed = w6_series_coefficients(3);
        assert_eq!(signed[2], -w6_theta(2));
        assert_eq!(signed[1], w6_theta(1));
    }

    #[test]
    fn w6_series_boundary_and_agreement() {
        let c = ctx();
        assert_eq!(w6_series_of_product(&c.zero(), 10).unwrap(), c.one());
        assert_eq!(w6_of_product(&c.zero()).unwrap(), c.one());
        for (l, x, terms) in [("0.5", "0.5", 200), ("0.25", "1", 300)] {
            let lam = c.parse(l).unwrap();
            let xv = c.parse(x).unwrap();
            let s = w6_series_eval(&lam, &xv, terms).unwrap();
            let closed = w("w6", l, x).unwrap();
            assert!(close(&s, closed.value(), 1e-50));
        }
        assert!(w6_series_eval(&c.parse("2").unwrap(), &c.one(), 10).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in [
            "w1", "w1_tilde", "size_biased", "w2", "w3", "w4", "w4_tilde", "w5", "w6", "w7",
        ] {
            let spec: WeightFunctionSpec = name.parse().unwrap();
            assert_eq!(spec.name(), name);
        }
        assert_eq!(
            "w3_4".parse::<WeightFunctionSpec>().unwrap().family,
            Family::KampsK(4)
        );
        assert_eq!(
            WeightFunctionSpec::from_name("cte", None).unwrap().family,
            Family::Cte
        );
        assert!(WeightFunctionSpec::from_name("w3_k", None).is_err());
        assert!(WeightFunctionSpec::from_name("w9", None).is_err());
    }
}
