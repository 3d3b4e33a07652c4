//! Stirling numbers, Bell polynomials, Schur functions and power matrices.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numkernel::{self, det_rational, index_subsets, BigScalar, DescendingTuple, KernelMatrix};

/// Default size of the memoized Stirling triangle.
pub const DEFAULT_K_MAX: usize = 64;

/// Weakly decreasing list of nonnegative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "partition parts must be weakly decreasing: {parts:?}"
            )));
        }
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Every partition with at most `m` parts (padded with zeros to length
    /// `m`) and weight at most `max_weight`.
    pub fn all_padded(m: usize, max_weight: u32) -> Vec<Partition> {
        fn rec(left: usize, cap: u32, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if left == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            for p in (0..=cap.min(budget)).rev() {
                cur.push(p);
                rec(left - 1, p, budget - p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(m, max_weight, max_weight, &mut Vec::new(), &mut out);
        out
    }
}

/// Eagerly built table of `S(k, m)` for `0 <= m <= k <= k_max`.
#[derive(Clone, Debug)]
pub struct StirlingTriangle {
    table: Vec<Vec<Integer>>,
}

impl StirlingTriangle {
    pub fn new(k_max: usize) -> Self {
        let mut table: Vec<Vec<Integer>> = Vec::with_capacity(k_max + 1);
        table.push(vec![Integer::from(1)]);
        for k in 1..=k_max {
            let prev = &table[k - 1];
            let mut row = vec![Integer::new(); k + 1];
            for m in 1..=k {
                let keep = if m < k {
                    Integer::from(&prev[m] * m as u64)
                } else {
                    Integer::new()
                };
                row[m] = keep + &prev[m - 1];
            }
            table.push(row);
        }
        StirlingTriangle { table }
    }

    pub fn k_max(&self) -> usize {
        self.table.len() - 1
    }

    /// `S(k, m)`; zero when `m > k`. Falls back to the recurrence beyond `k_max`.
    pub fn get(&self, k: usize, m: usize) -> Integer {
        if m > k {
            return Integer::new();
        }
        match self.table.get(k) {
            Some(row) => row[m].clone(),
            None => stirling2(k, m),
        }
    }
}

impl Default for StirlingTriangle {
    fn default() -> Self {
        StirlingTriangle::new(DEFAULT_K_MAX)
    }
}

/// Stirling number of the second kind via `S(k,m) = m S(k-1,m) + S(k-1,m-1)`.
pub fn stirling2(k: usize, m: usize) -> Integer {
    if m > k {
        return Integer::new();
    }
    // one row at a time, truncated at column m
    let mut row = vec![Integer::new(); m + 1];
    row[0] = Integer::from(1);
    for n in 1..=k {
        for j in (1..=m.min(n)).rev() {
            let t = Integer::from(&row[j] * j as u64) + &row[j - 1];
            row[j] = t;
        }
        row[0] = Integer::new();
    }
    row[m].clone()
}

/// Coefficients of `B_k(u) = sum_m S(k,m) u^m`, lowest degree first.
pub fn bell_poly(k: usize) -> Vec<Integer> {
    (0..=k).map(|m| stirling2(k, m)).collect()
}

fn eval_integer_poly(coeffs: &[Integer], u: &Float, bits: u32) -> Float {
    let mut acc = Float::with_val(bits, 0);
    for c in coeffs.iter().rev() {
        acc *= u;
        acc += c;
    }
    acc
}

/// `B_k(u)` evaluated from its Stirling coefficients.
pub fn bell_eval(k: usize, u: &BigScalar) -> BigScalar {
    let ctx = u.ctx();
    let bits = ctx.bits() + 32;
    let uv = Float::with_val(bits, u.value());
    ctx.from_float(&eval_integer_poly(&bell_poly(k), &uv, bits))
}

/// Partial sum of the Poisson moment series `sum_m e^-u u^m m^k / m!`.
pub fn bell_eval_poisson(k: usize, u: &BigScalar, terms: usize) -> Result<BigScalar> {
    if !u.is_positive() {
        return Err(Error::InvalidArgument("Poisson mean must be positive".into()));
    }
    let ctx = u.ctx();
    let bits = ctx.bits() + 32;
    let uv = Float::with_val(bits, u.value());
    let mut weight = Float::with_val(bits, -&uv).exp();
    let mut sum = Float::with_val(bits, 0);
    for m in 0..terms {
        if m > 0 {
            weight *= &uv;
            weight /= m as u64;
        }
        let mk = if k == 0 {
            Integer::from(1)
        } else {
            Integer::from(m).pow(k as u32)
        };
        sum += Float::with_val(bits, &weight * &mk);
    }
    Ok(ctx.from_float(&sum))
}

/// Number of Poisson terms after which the neglected tail of
/// `sum_m e^-u u^m m^k / m!` is below `10^(-digits)` relative.
pub fn poisson_terms_needed(k: usize, u: f64, digits: u32) -> usize {
    // term ratio is u (1 + 1/m)^k / (m+1); walk until the log-term falls far
    // below the log of the leading mass
    let target = -(digits as f64 + 10.0) * std::f64::consts::LN_10;
    let peak = (k as f64 + u).max(1.0);
    let mut log_term = 0.0f64;
    let mut m = 1usize;
    loop {
        log_term += u.ln() + k as f64 * ((m as f64) / ((m - 1).max(1) as f64)).ln()
            - (m as f64).ln();
        if m as f64 > 2.0 * peak && log_term < target {
            return m + 1;
        }
        m += 1;
    }
}

/// `B~_k(lambda) = lambda^k B_k(1/lambda) = sum_{m<k} S(k,k-m) lambda^m`, `B~_0 = 1`.
pub fn btilde(k: usize, lambda: &BigScalar) -> Result<BigScalar> {
    if !lambda.is_positive() {
        return Err(Error::InvalidArgument("btilde needs lambda > 0".into()));
    }
    let ctx = lambda.ctx();
    if k == 0 {
        return Ok(ctx.one());
    }
    let coeffs: Vec<Integer> = (0..k).map(|m| stirling2(k, k - m)).collect();
    let bits = ctx.bits() + 32;
    let l = Float::with_val(bits, lambda.value());
    Ok(ctx.from_float(&eval_integer_poly(&coeffs, &l, bits)))
}

/// Schur function by the bialternant quotient
/// `det(t_j^(theta_i + m - i)) / prod_{i<j} (t_i - t_j)`.
///
/// Arguments must be positive and pairwise separated by at least
/// `10^(-digits/4)` relative to the largest one.
pub fn schur(theta: &Partition, t: &[BigScalar]) -> Result<BigScalar> {
    let m = theta.len();
    if t.len() != m {
        return Err(Error::Dimension(format!(
            "partition has {m} parts but {} arguments were given",
            t.len()
        )));
    }
    if m == 0 {
        return Err(Error::Dimension("empty partition".into()));
    }
    let ctx = t[0].ctx();
    for v in t {
        v.same_context(&t[0])?;
        if !v.is_positive() {
            return Err(Error::InvalidArgument("Schur arguments must be positive".into()));
        }
    }
    let quarter = ctx.digits() / 4;
    // the alternant loses about quarter digits per factor of the Vandermonde
    let pairs = (m * (m - 1) / 2) as u32;
    let work = ctx.with_guard(pairs * quarter + 20);
    let bits = work.bits();
    let largest = t
        .iter()
        .map(|v| Float::with_val(bits, v.value()))
        .fold(Float::with_val(bits, 0), |a, b| if b > a { b } else { a });
    let min_gap = Float::with_val(bits, &largest * ctx.pow10_neg(quarter));
    let tw: Vec<Float> = t.iter().map(|v| Float::with_val(bits, v.value())).collect();
    let mut vandermonde = Float::with_val(bits, 1);
    for i in 0..m {
        for j in i + 1..m {
            let d = Float::with_val(bits, &tw[i] - &tw[j]);
            if Float::with_val(bits, d.abs_ref()) < min_gap {
                return Err(Error::InvalidArgument(
                    "Schur arguments coincide or are too close".into(),
                ));
            }
            vandermonde *= d;
        }
    }
    let alternant: Vec<Vec<BigScalar>> = (0..m)
        .map(|i| {
            let e = theta.parts()[i] + (m - 1 - i) as u32;
            tw.iter()
                .map(|tj| work.from_float(&Float::with_val(bits, tj.pow(e))))
                .collect()
        })
        .collect();
    let num = numkernel::det(&alternant)?;
    Ok(ctx.from_float(&Float::with_val(bits, num.value() / &vandermonde)))
}

/// Matrix of `lambda_i^(x_j)` on descending grids of positive `lambda`.
pub fn power_matrix(lambdas: &DescendingTuple, xs: &DescendingTuple) -> Result<KernelMatrix> {
    if lambdas.values().iter().any(|l| !l.is_positive()) {
        return Err(Error::InvalidArgument(
            "power matrix needs positive bases".into(),
        ));
    }
    KernelMatrix::from_fn(lambdas.clone(), xs.clone(), |l, x| {
        l.same_context(x)?;
        let bits = l.ctx().bits() + 32;
        let v = Float::with_val(bits, l.value()).pow(x.value());
        Ok(l.ctx().from_float(&v))
    })
}

/// Exact check of the discrete Binet-Cauchy formula
/// `det(sum_m A[i][m] B[m][j] nu[m]) = sum_{S} det(A[:,S]) det(B[S,:]) prod_{m in S} nu[m]`
/// over all `n`-subsets `S` of the `p` summation indices.
pub fn binet_cauchy_discrete_check(
    a: &[Vec<Rational>],
    b: &[Vec<Rational>],
    nu: &[Rational],
) -> Result<bool> {
    let n = a.len();
    let p = nu.len();
    if p < n {
        return Err(Error::Dimension(format!(
            "need at least as many summation points ({p}) as rows ({n})"
        )));
    }
    if a.iter().any(|r| r.len() != p) || b.len() != p || b.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(
            "A must be n x p and B must be p x n".into(),
        ));
    }
    if nu.iter().any(|w| *w <= 0) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    let product: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = Rational::new();
                    for m in 0..p {
                        s += Rational::from(&a[i][m] * &b[m][j]) * &nu[m];
                    }
                    s
                })
                .collect()
        })
        .collect();
    let lhs = det_rational(&product)?;

    let mut rhs = Rational::new();
    for subset in index_subsets(p, n) {
        let a_minor: Vec<Vec<Rational>> = (0..n)
            .map(|i| subset.iter().map(|&m| a[i][m].clone()).collect())
            .collect();
        let b_minor: Vec<Vec<Rational>> = subset.iter().map(|&m| b[m].clone()).collect();
        let mut weight = Rational::from(1);
        for &m in &subset {
            weight *= &nu[m];
        }
        rhs += det_rational(&a_minor)? * det_rational(&b_minor)? * weight;
    }
    Ok(lhs == rhs)
}
