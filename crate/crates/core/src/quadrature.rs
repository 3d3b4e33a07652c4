//! Adaptive Gauss-Legendre quadrature in arbitrary precision.

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::numkernel::PrecisionContext;

/// Default number of Gauss-Legendre points per panel.
pub const DEFAULT_POINTS: usize = 24;

const MAX_DEPTH: u32 = 200;
const MAX_DOUBLINGS: u32 = 64;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<Float>,
    weights: Vec<Float>,
    bits: u32,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Float, bits: u32) -> (Float, Float) {
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let kf = k as u32;
        let a = Float::with_val(bits, &p1 * x) * (2 * kf - 1);
        let b = Float::with_val(bits, &p0 * (kf - 1));
        let p2 = (a - b) / kf;
        p0 = p1;
        p1 = p2;
    }
    let one_minus = Float::with_val(bits, 1) - Float::with_val(bits, x.square_ref());
    let dp = Float::with_val(bits, &p0 - Float::with_val(bits, x * &p1)) * n as u32 / one_minus;
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize, bits: u32) -> Self {
        assert!(n >= 2, "a Gauss rule needs at least two points");
        let work = bits + 32;
        let pi = Float::with_val(work, Constant::Pi);
        let tol = Float::with_val(work, Float::i_exp(1, -(bits as i32) - 8));
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 1..=n {
            // Tricomi initial guess, then Newton
            let guess = Float::with_val(work, &pi * (i as f64 - 0.25)) / (n as f64 + 0.5);
            let mut x = guess.cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, &x, work);
                let step = Float::with_val(work, &p / &dp);
                x -= &step;
                if step.abs() < tol {
                    break;
                }
            }
            let (_, dp) = legendre(n, &x, work);
            let one_minus = Float::with_val(work, 1) - Float::with_val(work, x.square_ref());
            let w = Float::with_val(work, 2) / (one_minus * dp.square());
            nodes.push(Float::with_val(bits, &x));
            weights.push(Float::with_val(bits, &w));
        }
        GaussLegendre {
            nodes,
            weights,
            bits,
        }
    }

    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Float] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Float] {
        &self.weights
    }

    /// The rule mapped onto `[a, b]`.
    pub fn apply<F>(&self, a: &Float, b: &Float, f: &mut F) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let bits = self.bits;
        let half = Float::with_val(bits, b - a) / 2u32;
        let mid = Float::with_val(bits, a + b) / 2u32;
        let mut sum = Float::with_val(bits, 0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = Float::with_val(bits, &half * x) + &mid;
            let fx = f(&t)?;
            if !fx.is_finite() {
                return Err(Error::Divergent(format!(
                    "integrand is not finite at x = {}",
                    t.to_f64()
                )));
            }
            sum += Float::with_val(bits, w * &fx);
        }
        Ok(sum * half)
    }
}

/// Adaptive integrator with a relative error target.
#[derive(Clone, Debug)]
pub struct Quadrature {
    rule: GaussLegendre,
    rel_tol: Float,
    bits: u32,
}

impl Quadrature {
    /// Integrator working at `ctx` plus 20 guard digits, targeting relative
    /// error `10^(-tol_digits)`.
    pub fn new(ctx: &PrecisionContext, tol_digits: u32) -> Self {
        let bits = ctx.with_guard(20).bits();
        Quadrature {
            rule: GaussLegendre::new(DEFAULT_POINTS, bits),
            rel_tol: ctx.with_guard(20).pow10_neg(tol_digits),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    /// `int_a^b f` by recursive bisection until each panel's two-half estimate
    /// agrees with its whole-panel estimate.
    pub fn integrate<F>(&self, a: &Float, b: &Float, f: &mut F) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let floor = Float::with_val(self.bits, Float::i_exp(1, -(self.bits as i32) * 4));
        self.integrate_with_floor(a, b, &floor, f)
    }

    /// As [`Quadrature::integrate`], but panels whose error is below
    /// `abs_floor` are accepted even if their relative error is larger.
    pub fn integrate_with_floor<F>(
        &self,
        a: &Float,
        b: &Float,
        abs_floor: &Float,
        f: &mut F,
    ) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        if a == b {
            return Ok(Float::with_val(self.bits, 0));
        }
        let whole = self.rule.apply(a, b, f)?;
        let relative = Float::with_val(self.bits, whole.abs_ref()) * &self.rel_tol;
        let abs_tol = relative.max(abs_floor);
        self.refine(a, b, whole, &abs_tol, 0, f)
    }

    fn refine<F>(
        &self,
        a: &Float,
        b: &Float,
        whole: Float,
        abs_tol: &Float,
        depth: u32,
        f: &mut F,
    ) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let mid = Float::with_val(self.bits, a + b) / 2u32;
        let left = self.rule.apply(a, &mid, f)?;
        let right = self.rule.apply(&mid, b, f)?;
        let both = Float::with_val(self.bits, &left + &right);
        let diff = Float::with_val(self.bits, &both - &whole).abs();
        if diff <= *abs_tol {
            return Ok(both);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::NoConvergence(format!(
                "quadrature panel [{}, {}] did not settle",
                a.to_f64(),
                b.to_f64()
            )));
        }
        let half_tol = Float::with_val(self.bits, abs_tol / 2u32);
        let l = self.refine(a, &mid, left, &half_tol, depth + 1, f)?;
        let r = self.refine(&mid, b, right, &half_tol, depth + 1, f)?;
        Ok(l + r)
    }

    /// Integral over consecutive segments of a sorted break list.
    pub fn integrate_segments<F>(&self, breaks: &[Float], f: &mut F) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let mut total = Float::with_val(self.bits, 0);
        for w in breaks.windows(2) {
            total += self.integrate(&w[0], &w[1], f)?;
        }
        Ok(total)
    }

    /// `int_a^inf f` over panels `[a, a+s], [a+s, a+2s], [a+2s, a+4s], ...`,
    /// with interior `breaks` inserted as panel boundaries. Stops once a panel
    /// beyond every break contributes below the relative target; reports
    /// divergence when panel contributions keep growing.
    pub fn integrate_to_infinity<F>(
        &self,
        a: &Float,
        scale: &Float,
        breaks: &[Float],
        f: &mut F,
    ) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let bits = self.bits;
        let mut total = Float::with_val(bits, 0);
        let mut width = Float::with_val(bits, scale);
        let mut pending: Vec<Float> = breaks.iter().filter(|b| *b > a).cloned().collect();
        pending.sort_by(|x, y| x.partial_cmp(y).expect("finite breaks"));
        let mut previous: Option<Float> = None;
        let mut growing = 0u32;
        let mut quiet = 0u32;
        let mut lo = a.clone();
        for step in 0..(MAX_DOUBLINGS + pending.len() as u32) {
            let mut hi = Float::with_val(bits, &lo + &width);
            let mut at_break = false;
            if pending.first().is_some_and(|next| *next <= hi) {
                hi = pending.remove(0);
                at_break = true;
            }
            // once the bulk is known, tail panels only need absolute accuracy
            let floor = Float::with_val(bits, total.abs_ref()) * &self.rel_tol / 64u32;
            let part = self.integrate_with_floor(&lo, &hi, &floor, f)?;
            total += &part;
            lo = hi;
            if !at_break {
                width *= 2u32;
            }
            let size = Float::with_val(bits, part.abs_ref());
            if let Some(prev) = &previous {
                if size > *prev && step > 12 {
                    growing += 1;
                } else {
                    growing = 0;
                }
            }
            if growing >= 3 {
                return Err(Error::Divergent(
                    "tail panels grow without bound".into(),
                ));
            }
            let target = Float::with_val(bits, total.abs_ref()) * &self.rel_tol;
            if pending.is_empty() && size <= target {
                quiet += 1;
                if quiet >= 2 {
                    return Ok(total);
                }
            } else {
                quiet = 0;
            }
            previous = Some(size);
        }
        Err(Error::Divergent(format!(
            "tail not negligible after {MAX_DOUBLINGS} doublings"
        )))
    }
}
