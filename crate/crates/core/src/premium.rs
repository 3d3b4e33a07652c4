//! Weighted premiums `H[lambda, f(X)] = E[w(lambda,X) f(X)] / E[w(lambda,X)]`
//! by high-precision quadrature, with the minor matrix, dispersion and
//! Lipschitz diagnostics that total positivity of `w` implies.

use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::{BigScalar, DescendingTuple, KernelMatrix, PrecisionContext};
use crate::quadrature::Quadrature;
use crate::tpcheck::SignReport;
use crate::weights::{self, Family, Transform, WeightFunctionSpec};

/// Distribution of the nonnegative loss `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum LossModel {
    Exponential { rate: BigScalar },
    GammaDist { shape: BigScalar, rate: BigScalar },
    UniformDist { a: BigScalar, b: BigScalar },
}

impl LossModel {
    pub fn exponential(rate: BigScalar) -> Result<Self> {
        if !rate.is_positive() {
            return Err(Error::InvalidArgument("exponential rate must be positive".into()));
        }
        Ok(LossModel::Exponential { rate })
    }

    pub fn gamma(shape: BigScalar, rate: BigScalar) -> Result<Self> {
        shape.same_context(&rate)?;
        if !shape.is_positive() || !rate.is_positive() {
            return Err(Error::InvalidArgument(
                "gamma shape and rate must be positive".into(),
            ));
        }
        Ok(LossModel::GammaDist { shape, rate })
    }

    pub fn uniform(a: BigScalar, b: BigScalar) -> Result<Self> {
        a.same_context(&b)?;
        if a.is_negative() || a.compare(&b)? != std::cmp::Ordering::Less {
            return Err(Error::InvalidArgument(
                "uniform loss needs 0 <= a < b".into(),
            ));
        }
        Ok(LossModel::UniformDist { a, b })
    }

    /// Parse `exponential:<rate>`, `gamma:<shape>:<rate>` or
    /// `uniform:<a>:<b>`, reading numbers as exact decimals.
    pub fn parse(ctx: &PrecisionContext, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        match parts.as_slice() {
            ["exponential", r] => LossModel::exponential(ctx.parse(r)?),
            ["gamma", s, r] => LossModel::gamma(ctx.parse(s)?, ctx.parse(r)?),
            ["uniform", a, b] => LossModel::uniform(ctx.parse(a)?, ctx.parse(b)?),
            _ => Err(Error::Parse(format!("unrecognised loss model '{text}'"))),
        }
    }

    pub fn ctx(&self) -> PrecisionContext {
        match self {
            LossModel::Exponential { rate } => rate.ctx(),
            LossModel::GammaDist { shape, .. } => shape.ctx(),
            LossModel::UniformDist { a, .. } => a.ctx(),
        }
    }

    /// Exponential decay rate of the density tail, if the support is unbounded.
    fn tail_rate(&self) -> Option<&BigScalar> {
        match self {
            LossModel::Exponential { rate } | LossModel::GammaDist { rate, .. } => Some(rate),
            LossModel::UniformDist { .. } => None,
        }
    }

    fn support_start(&self, bits: u32) -> Float {
        match self {
            LossModel::UniformDist { a, .. } => Float::with_val(bits, a.value()),
            _ => Float::with_val(bits, 0),
        }
    }

    /// Natural length scale for the first tail panel.
    fn scale(&self, bits: u32) -> Float {
        match self {
            LossModel::Exponential { rate } => Float::with_val(bits, 1) / rate.value(),
            LossModel::GammaDist { shape, rate } => {
                Float::with_val(bits, shape.value()).max(&Float::with_val(bits, 1)) / rate.value()
            }
            LossModel::UniformDist { a, b } => Float::with_val(bits, b.value() - a.value()),
        }
    }

    pub fn density(&self, x: &Float, bits: u32) -> Float {
        match self {
            LossModel::Exponential { rate } => {
                if x.is_sign_negative() {
                    return Float::with_val(bits, 0);
                }
                let r = Float::with_val(bits, rate.value());
                Float::with_val(bits, -(Float::with_val(bits, &r * x))).exp() * r
            }
            LossModel::GammaDist { shape, rate } => {
                if x.is_sign_negative() || x.is_zero() {
                    return Float::with_val(bits, 0);
                }
                let s = Float::with_val(bits, shape.value());
                let r = Float::with_val(bits, rate.value());
                let rx = Float::with_val(bits, &r * x);
                let log = Float::with_val(bits, s.clone() * r.ln())
                    + Float::with_val(bits, &s - 1u32) * x.clone().ln()
                    - rx
                    - Float::with_val(bits, s.ln_gamma_ref());
                log.exp()
            }
            LossModel::UniformDist { a, b } => {
                if *x < *a.value() || *x > *b.value() {
                    Float::with_val(bits, 0)
                } else {
                    Float::with_val(bits, 1) / Float::with_val(bits, b.value() - a.value())
                }
            }
        }
    }
}

impl fmt::Display for LossModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossModel::Exponential { rate } => write!(f, "exponential:{rate}"),
            LossModel::GammaDist { shape, rate } => write!(f, "gamma:{shape}:{rate}"),
            LossModel::UniformDist { a, b } => write!(f, "uniform:{a}:{b}"),
        }
    }
}

/// Non-decreasing utility `f` applied to the loss.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum UtilitySpec {
    Identity,
    /// `x^p`
    Power { p: BigScalar },
    /// `min(x, c)`
    CappedLinear { cap: BigScalar },
    /// `int_0^x (1 - e^(-rate t)) dt`, the integral of an exponential CDF.
    IntegratedExpCdf { rate: BigScalar },
}

impl UtilitySpec {
    /// Parse `identity`, `power:<p>`, `capped:<c>` or `integrated_exp_cdf:<rate>`.
    pub fn parse(ctx: &PrecisionContext, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let u = match parts.as_slice() {
            ["identity"] => UtilitySpec::Identity,
            ["power", p] => UtilitySpec::Power { p: ctx.parse(p)? },
            ["capped", c] => UtilitySpec::CappedLinear { cap: ctx.parse(c)? },
            ["integrated_exp_cdf", r] => UtilitySpec::IntegratedExpCdf { rate: ctx.parse(r)? },
            _ => return Err(Error::Parse(format!("unrecognised utility '{text}'"))),
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UtilitySpec::Power { p } if !p.is_positive() => {
                Err(Error::InvalidArgument("power utility needs p > 0".into()))
            }
            UtilitySpec::CappedLinear { cap } if cap.is_negative() => {
                Err(Error::InvalidArgument("cap must be nonnegative".into()))
            }
            UtilitySpec::IntegratedExpCdf { rate } if !rate.is_positive() => {
                Err(Error::InvalidArgument("CDF rate must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Whether `|f(x1) - f(x2)| <= |x1 - x2|` holds for the whole family.
    pub fn lipschitz_1(&self) -> bool {
        match self {
            UtilitySpec::Identity
            | UtilitySpec::CappedLinear { .. }
            | UtilitySpec::IntegratedExpCdf { .. } => true,
            UtilitySpec::Power { p } => *p.value() == 1,
        }
    }

    /// True when `f` is constant on `[0, inf)`.
    pub fn is_constant(&self) -> bool {
        matches!(self, UtilitySpec::CappedLinear { cap } if cap.is_zero())
    }

    pub fn eval(&self, x: &Float, bits: u32) -> Float {
        match self {
            UtilitySpec::Identity => Float::with_val(bits, x),
            UtilitySpec::Power { p } => Float::with_val(bits, x).pow(p.value()),
            UtilitySpec::CappedLinear { cap } => Float::with_val(bits, x).min(cap.value()),
            UtilitySpec::IntegratedExpCdf { rate } => {
                let rx = -Float::with_val(bits, x * rate.value());
                Float::with_val(bits, x) + rx.exp_m1() / rate.value()
            }
        }
    }

    fn breaks(&self) -> Vec<&BigScalar> {
        match self {
            UtilitySpec::CappedLinear { cap } => vec![cap],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilitySpec::Identity => write!(f, "identity"),
            UtilitySpec::Power { p } => write!(f, "power:{p}"),
            UtilitySpec::CappedLinear { cap } => write!(f, "capped:{cap}"),
            UtilitySpec::IntegratedExpCdf { rate } => write!(f, "integrated_exp_cdf:{rate}"),
        }
    }
}

/// Premium and dispersion at one loading.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PremiumReport {
    pub lambda: BigScalar,
    /// `H[lambda, f(X)]`, which is also the weighted mean `mu_lambda`.
    pub h: BigScalar,
    pub mu: BigScalar,
    pub sigma2: BigScalar,
    /// `sigma2 / mu`
    pub vmr: BigScalar,
    /// `H[lambda, f(X)^2] / H[lambda, f(X)] = mu + vmr`
    pub second_ratio: BigScalar,
}

/// Digits of relative accuracy requested from one-dimensional quadrature.
fn quad_digits(ctx: &PrecisionContext) -> u32 {
    ctx.digits() / 2 + 10
}

fn work_ctx(ctx: &PrecisionContext) -> PrecisionContext {
    ctx.with_guard(20)
}

/// Reject weight/loss pairs whose moments are infinite.
fn check_integrable(spec: &WeightFunctionSpec, loss: &LossModel, lambda: &BigScalar) -> Result<()> {
    let Some(rate) = loss.tail_rate() else {
        return Ok(());
    };
    let bits = lambda.ctx().bits();
    let l = Float::with_val(bits, lambda.value());
    // exponential growth rate of w(lambda, x) in x, when it has one
    let growth = match spec.family {
        Family::Esscher | Family::AumannShapley(Transform::Identity) => Some(l.clone()),
        Family::SizeBiased => Some(l.clone().ln()),
        Family::W5 => Some(l.clone().ln_1p()),
        Family::PseudoPoisson if l.is_sign_positive() && !l.is_zero() => {
            return Err(Error::Divergent(format!(
                "w4 grows doubly exponentially and is not integrable against {loss}"
            )));
        }
        Family::PseudoPoissonRaw => {
            if l > 1 {
                return Err(Error::Divergent(format!(
                    "w4_tilde with lambda > 1 is not integrable against {loss}"
                )));
            }
            (l == 1).then(|| Float::with_val(bits, 1))
        }
        _ => None,
    };
    if let Some(g) = growth {
        if g >= *rate.value() {
            return Err(Error::Divergent(format!(
                "{spec} at lambda = {lambda} grows at least as fast as the tail of {loss} decays"
            )));
        }
    }
    Ok(())
}

fn sorted_breaks(mut pts: Vec<Float>) -> Vec<Float> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breaks"));
    pts.dedup();
    pts
}

/// Integral of `h(x) g(x)` over the support of `loss`, splitting at `breaks`.
fn integrate_loss<F>(q: &Quadrature, loss: &LossModel, breaks: Vec<Float>, mut h: F) -> Result<Float>
where
    F: FnMut(&Float) -> Result<Float>,
{
    let bits = q.bits();
    let start = loss.support_start(bits);
    let mut integrand = |x: &Float| -> Result<Float> {
        let d = loss.density(x, bits);
        if d.is_zero() {
            return Ok(d);
        }
        Ok(h(x)? * d)
    };
    match loss {
        LossModel::UniformDist { b, .. } => {
            let end = Float::with_val(bits, b.value());
            let mut pts: Vec<Float> = breaks.into_iter().filter(|p| *p > start && *p < end).collect();
            pts.push(start);
            pts.push(end);
            q.integrate_segments(&sorted_breaks(pts), &mut integrand)
        }
        LossModel::GammaDist { shape, .. } if !shape.value().is_integer() => {
            let mut pts = sorted_breaks(breaks.into_iter().filter(|p| *p > start).collect());
            let scale = loss.scale(bits);
            let head_end = match pts.first() {
                Some(p) if *p < scale => pts.remove(0),
                _ => scale.clone(),
            };
            let head = singular_head(q, shape, &head_end, &mut integrand)?;
            let tail = q.integrate_to_infinity(&head_end, &scale, &pts, &mut integrand)?;
            Ok(head + tail)
        }
        _ => {
            let pts = sorted_breaks(breaks.into_iter().filter(|p| *p > start).collect());
            q.integrate_to_infinity(&start, &loss.scale(bits), &pts, &mut integrand)
        }
    }
}

/// `int_0^b g` for a Gamma integrand behaving like `x^(s-1)` at the origin.
/// With `x = y^k` the endpoint factor becomes `y^(ks-1)`, smooth enough for
/// Gauss-Legendre once `ks` is large.
fn singular_head<F>(q: &Quadrature, shape: &BigScalar, b: &Float, g: &mut F) -> Result<Float>
where
    F: FnMut(&Float) -> Result<Float>,
{
    let bits = q.bits();
    let k = (32.0 / shape.to_f64()).ceil().max(1.0) as u32;
    let top = Float::with_val(bits, b.root_ref(k));
    let mut mapped = |y: &Float| -> Result<Float> {
        if y.is_zero() {
            return Ok(Float::with_val(bits, 0));
        }
        let x = Float::with_val(bits, y.pow(k));
        let jac = Float::with_val(bits, y.pow(k - 1)) * k;
        Ok(g(&x)? * jac)
    };
    q.integrate(&Float::with_val(bits, 0), &top, &mut mapped)
}

fn weight_at(spec: &WeightFunctionSpec, lambda: &BigScalar, x: &Float) -> Result<Float> {
    let wctx = lambda.ctx();
    Ok(weights::eval(spec, lambda, &wctx.from_float(x))?.into_float())
}

fn breakpoints(spec: &WeightFunctionSpec, u: &UtilitySpec, lambda: &BigScalar, bits: u32) -> Vec<Float> {
    let mut pts: Vec<Float> = u.breaks().iter().map(|c| Float::with_val(bits, c.value())).collect();
    if spec.is_indicator() {
        pts.push(Float::with_val(bits, lambda.value()));
    }
    pts
}

/// Several moments `E[w(lambda,X) f(X)^p]` for `p` in `powers`, each by its
/// own adaptive quadrature at working precision.
fn moments(
    spec: &WeightFunctionSpec,
    powers: &[u32],
    u: &UtilitySpec,
    loss: &LossModel,
    lambda: &BigScalar,
) -> Result<Vec<Float>> {
    lambda.same_context(&loss_anchor(loss))?;
    u.validate()?;
    let ctx = lambda.ctx();
    let domain = spec.domain();
    if !domain.contains(lambda.value(), &ctx.float(1)) {
        return Err(Error::Domain {
            family: spec.name(),
            lambda: lambda.to_decimal(20),
            x: "any".into(),
        });
    }
    check_integrable(spec, loss, lambda)?;
    let wctx = work_ctx(&ctx);
    let q = Quadrature::new(&ctx, quad_digits(&ctx));
    let bits = q.bits();
    let lw = lambda.rebind(wctx);
    powers
        .iter()
        .map(|&p| {
            integrate_loss(&q, loss, breakpoints(spec, u, lambda, bits), |x| {
                let w = weight_at(spec, &lw, x)?;
                if p == 0 {
                    return Ok(w);
                }
                Ok(w * u.eval(x, bits).pow(p))
            })
        })
        .collect()
}

fn loss_anchor(loss: &LossModel) -> BigScalar {
    match loss {
        LossModel::Exponential { rate } => rate.clone(),
        LossModel::GammaDist { shape, .. } => shape.clone(),
        LossModel::UniformDist { a, .. } => a.clone(),
    }
}

/// `E[w(lambda, X) f(X)^power]`.
pub fn expectation(
    spec: &WeightFunctionSpec,
    power: u32,
    u: &UtilitySpec,
    loss: &LossModel,
    lambda: &BigScalar,
) -> Result<BigScalar> {
    let m = moments(spec, &[power], u, loss, lambda)?;
    Ok(lambda.ctx().from_float(&m[0]))
}

/// `E[f(X)]`, the net premium of `f(X)`.
pub fn net_premium(u: &UtilitySpec, loss: &LossModel) -> Result<BigScalar> {
    let ctx = loss.ctx();
    let q = Quadrature::new(&ctx, quad_digits(&ctx));
    let bits = q.bits();
    let breaks = u.breaks().iter().map(|c| Float::with_val(bits, c.value())).collect();
    let v = integrate_loss(&q, loss, breaks, |x| Ok(u.eval(x, bits)))?;
    Ok(ctx.from_float(&v))
}

fn ratio(num: &Float, den: &Float) -> Result<Float> {
    if den.is_zero() {
        return Err(Error::InvalidArgument(
            "the weight annihilates the loss distribution".into(),
        ));
    }
    Ok(Float::with_val(num.prec(), num / den))
}

/// `H[lambda, f(X)]`.
pub fn premium_h(
    spec: &WeightFunctionSpec,
    u: &UtilitySpec,
    loss: &LossModel,
    lambda: &BigScalar,
) -> Result<BigScalar> {
    let m = moments(spec, &[0, 1], u, loss, lambda)?;
    Ok(lambda.ctx().from_float(&ratio(&m[1], &m[0])?))
}

/// `H[lambda, f(X)^power]`.
pub fn premium_h_power(
    spec: &WeightFunctionSpec,
    power: u32,
    u: &UtilitySpec,
    loss: &LossModel,
    lambda: &BigScalar,
) -> Result<BigScalar> {
    let m = moments(spec, &[0, power], u, loss, lambda)?;
    Ok(lambda.ctx().from_float(&ratio(&m[1], &m[0])?))
}

/// Premium against net premium.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoadingCheck {
    pub h: BigScalar,
    pub net: BigScalar,
    /// `H >= E[f(X)]` within `10^(-digits/4)` relative.
    pub loaded: bool,
}

/// Compare `H[lambda, f(X)]` with `E[f(X)]`. Loading is expected, not assumed,
/// for weights increasing in `x`; the result is reported either way.
pub fn loading_check(
    spec: &WeightFunctionSpec,
    u: &UtilitySpec,
    loss: &LossModel,
    lambda: &BigScalar,
) -> Result<LoadingCheck> {
    let h = premium_h(spec, u, loss, lambda)?;
    let net = net_premium(u, loss)?;
    let ctx = lambda.ctx();
    let bits = ctx.bits();
    let slack = Float::with_val(bits, net.value().abs_ref()) * ctx.pow10_neg(ctx.digits() / 4);
    let loaded = Float::with_val(bits, h.value() - net.value()) >= -slack;
    Ok(LoadingCheck { h, net, loaded })
}

/// `grid[i][j] = H[lambda_i, f(X)^(k-1-j)]` with all minors classified. The
/// columns are indexed by the descending exponents `k-1, ..., 0`.
pub fn premium_matrix(
    spec: &WeightFunctionSpec,
    u: &UtilitySpec,
    loss: &LossModel,
    lambdas: &DescendingTuple,
    k: usize,
) -> Result<SignReport> {
    if k == 0 || k != lambdas.len() {
        return Err(Error::Dimension(format!(
            "premium matrix order {k} must equal the number of loadings {}",
            lambdas.len()
        )));
    }
    let ctx = lambdas.ctx();
    let powers: Vec<u32> = (0..k as u32).collect();
    let rows: Vec<Vec<BigScalar>> = lambdas
        .values()
        .par_iter()
        .map(|l| -> Result<Vec<BigScalar>> {
            let m = moments(spec, &powers, u, loss, l)?;
            (0..k)
                .map(|j| Ok(ctx.from_float(&ratio(&m[k - 1 - j], &m[0])?)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let cols: Vec<BigScalar> = (0..k).rev().map(|e| ctx.scalar(e as u32)).collect();
    let matrix = KernelMatrix::new(lambdas.clone(), DescendingTuple::new(cols)?, rows)?;
    SignReport::from_matrix(matrix, false)
}

/// One [`PremiumReport`] per loading, in the given order.
pub fn vmr_curve(
    spec: &WeightFunctionSpec,
    u: &UtilitySpec,
    loss: &LossModel,
    lambdas: &[BigScalar],
) -> Result<Vec<PremiumReport>> {
    lambdas
        .par_iter()
        .map(|l| {
            let ctx = l.ctx();
            let bits = ctx.with_guard(20).bits();
            let m = moments(spec, &[0, 1, 2], u, loss, l)?;
            let mu = ratio(&m[1], &m[0])?;
            let second = ratio(&m[2], &m[0])?;
            let sigma2 = Float::with_val(bits, &second - Float::with_val(bits, mu.square_ref()));
            let vmr = ratio(&sigma2, &mu)?;
            let second_ratio = ratio(&second, &mu)?;
            Ok(PremiumReport {
                lambda: l.clone(),
                h: ctx.from_float(&mu),
                mu: ctx.from_float(&mu),
                sigma2: ctx.from_float(&sigma2),
                vmr: ctx.from_float(&vmr),
                second_ratio: ctx.from_float(&second_ratio),
            })
        })
        .collect()
}

/// True when each value is at least its predecessor minus `tol` relative.
pub fn is_nondecreasing(values: &[BigScalar], tol: &Float) -> bool {
    values.windows(2).all(|w| {
        let bits = w[0].ctx().bits();
        let slack = Float::with_val(bits, w[0].value().abs_ref()) * tol;
        Float::with_val(bits, w[1].value() - w[0].value()) >= -slack
    })
}

/// Both sides of `H[l1, f] - H[l2, f] <= H[l1, X] - H[l2, X]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzGap {
    pub lhs: BigScalar,
    pub rhs: BigScalar,
    /// `rhs - lhs`
    pub margin: BigScalar,
    pub holds: bool,
}

pub fn lipschitz_gap(
    spec: &WeightFunctionSpec,
    u: &UtilitySpec,
    loss: &LossModel,
    lambda1: &BigScalar,
    lambda2: &BigScalar,
) -> Result<LipschitzGap> {
    if !u.lipschitz_1() {
        return Err(Error::InvalidArgument(format!(
            "utility {u} is not 1-Lipschitz"
        )));
    }
    if lambda1.compare(lambda2)? != std::cmp::Ordering::Greater {
        return Err(Error::NotDescending(0));
    }
    let ctx = lambda1.ctx();
    let bits = ctx.bits();
    let id = UtilitySpec::Identity;
    let diff = |f: &UtilitySpec| -> Result<Float> {
        let a = premium_h(spec, f, loss, lambda1)?;
        let b = premium_h(spec, f, loss, lambda2)?;
        Ok(Float::with_val(bits, a.value() - b.value()))
    };
    let lhs = diff(u)?;
    let rhs = diff(&id)?;
    let margin = Float::with_val(bits, &rhs - &lhs);
    let tol = ctx.pow10_neg(ctx.digits() / 4);
    let holds = margin >= -tol;
    Ok(LipschitzGap {
        lhs: ctx.from_float(&lhs),
        rhs: ctx.from_float(&rhs),
        margin: ctx.from_float(&margin),
        holds,
    })
}

/// Both sides of the double-integral representation
/// `E[w1] E[w2] (H[l1,f] - H[l2,f]) = int_{x1 > x2} (f(x1) - f(x2)) det(w(l_i, x_j)) g(x1) g(x2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrelipschitzCheck {
    pub left: BigScalar,
    pub right: BigScalar,
    pub residual: BigScalar,
}

impl PrelipschitzCheck {
    /// `residual / |left|`, or the bare residual when `left` vanishes.
    pub fn relative(&self) -> BigScalar {
        if self.left.is_zero() {
            return self.residual.clone();
        }
        let bits = self.left.ctx().bits();
        self.left
            .ctx()
            .from_float(&Float::with_val(bits, self.residual.value() / self.left.value()).abs())
    }
}

pub fn prelipschitz_identity_check(
    spec: &WeightFunctionSpec,
    u: &UtilitySpec,
    loss: &LossModel,
    lambda1: &BigScalar,
    lambda2: &BigScalar,
) -> Result<PrelipschitzCheck> {
    if lambda1.compare(lambda2)? != std::cmp::Ordering::Greater {
        return Err(Error::NotDescending(0));
    }
    let ctx = lambda1.ctx();
    let m1 = moments(spec, &[0, 1], u, loss, lambda1)?;
    let m2 = moments(spec, &[0, 1], u, loss, lambda2)?;
    let wbits = m1[0].prec();
    let left = Float::with_val(wbits, &m1[1] * &m2[0]) - Float::with_val(wbits, &m2[1] * &m1[0]);

    // x2 = lo + s (x1 - lo) sends the triangle x1 > x2 >= lo onto a square
    let wctx = work_ctx(&ctx);
    let tol_digits = ctx.digits() / 4 + 10;
    let outer = Quadrature::new(&ctx, tol_digits);
    let inner = Quadrature::new(&ctx, tol_digits);
    let bits = outer.bits();
    let l1 = lambda1.rebind(wctx);
    let l2 = lambda2.rebind(wctx);
    let lo = loss.support_start(bits);
    let util_breaks: Vec<Float> = u.breaks().iter().map(|c| Float::with_val(bits, c.value())).collect();
    let mut weight_breaks = Vec::new();
    if spec.is_indicator() {
        weight_breaks.push(Float::with_val(bits, lambda1.value()));
        weight_breaks.push(Float::with_val(bits, lambda2.value()));
    }
    let zero = Float::with_val(bits, 0);
    let one = Float::with_val(bits, 1);

    let mut row = |x1: &Float| -> Result<Float> {
        let g1 = loss.density(x1, bits);
        if g1.is_zero() {
            return Ok(zero.clone());
        }
        let f1 = u.eval(x1, bits);
        let a11 = weight_at(spec, &l1, x1)?;
        let a21 = weight_at(spec, &l2, x1)?;
        let span = Float::with_val(bits, x1 - &lo);
        // inner breaks where x2 crosses a kink of f or a jump of w
        let mut s_breaks = vec![zero.clone(), one.clone()];
        for p in util_breaks.iter().chain(&weight_breaks) {
            let s = Float::with_val(bits, p - &lo) / &span;
            if s > zero && s < one {
                s_breaks.push(s);
            }
        }
        let s_breaks = sorted_breaks(s_breaks);
        let mut cell = |s: &Float| -> Result<Float> {
            let x2 = Float::with_val(bits, &span * s) + &lo;
            let g2 = loss.density(&x2, bits);
            if g2.is_zero() {
                return Ok(zero.clone());
            }
            let df = Float::with_val(bits, &f1 - u.eval(&x2, bits));
            if df.is_zero() {
                return Ok(df);
            }
            let a12 = weight_at(spec, &l1, &x2)?;
            let a22 = weight_at(spec, &l2, &x2)?;
            let det = Float::with_val(bits, &a11 * &a22) - Float::with_val(bits, &a21 * &a12);
            Ok(df * det * g2)
        };
        let v = inner.integrate_segments(&s_breaks, &mut cell)?;
        Ok(v * g1 * &span)
    };
    let mut outer_breaks: Vec<Float> = util_breaks.clone();
    outer_breaks.extend(weight_breaks.iter().cloned());
    let right = match loss {
        LossModel::UniformDist { b, .. } => {
            let mut pts: Vec<Float> = outer_breaks
                .into_iter()
                .filter(|p| *p > lo && *p < *b.value())
                .collect();
            pts.push(lo.clone());
            pts.push(Float::with_val(bits, b.value()));
            outer.integrate_segments(&sorted_breaks(pts), &mut row)?
        }
        _ => {
            let pts = sorted_breaks(outer_breaks.into_iter().filter(|p| *p > lo).collect());
            outer.integrate_to_infinity(&lo, &loss.scale(bits), &pts, &mut row)?
        }
    };
    let residual = Float::with_val(bits, &left - &right).abs();
    Ok(PrelipschitzCheck {
        left: ctx.from_float(&left),
        right: ctx.from_float(&right),
        residual: ctx.from_float(&residual),
    })
}
