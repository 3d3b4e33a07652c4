//! Arbitrary-precision scalars, determinants, minors and sign classification.
//!
//! Every numeric value in the crate is a [`BigScalar`] bound to a
//! [`PrecisionContext`]. Determinants are computed by partially pivoted
//! elimination at the context precision; integer-valued matrices take an
//! exact fraction-free path so that 0/1 kernels produce exact minors.

use std::cmp::Ordering;
use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

/// Requested decimal precision plus the relative threshold below which a
/// value counts as zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    digits: u32,
    sign_tol_exponent: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            digits: Self::DEFAULT_DIGITS,
            sign_tol_exponent: Self::DEFAULT_DIGITS / 2,
        }
    }
}

impl PrecisionContext {
    pub const DEFAULT_DIGITS: u32 = 120;
    pub const MIN_DIGITS: u32 = 50;

    /// Context with `digits` significant digits and the default zero
    /// threshold exponent `digits / 2`.
    pub fn new(digits: u32) -> Result<Self> {
        Self::with_sign_tolerance(digits, digits / 2)
    }

    pub fn with_sign_tolerance(digits: u32, sign_tol_exponent: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::PrecisionTooLow {
                digits,
                min: Self::MIN_DIGITS,
            });
        }
        if sign_tol_exponent == 0 || sign_tol_exponent >= digits {
            return Err(Error::BadTolerance {
                digits,
                tol: sign_tol_exponent,
            });
        }
        Ok(PrecisionContext {
            digits,
            sign_tol_exponent,
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn sign_tol_exponent(&self) -> u32 {
        self.sign_tol_exponent
    }

    /// Binary precision backing `digits` decimal digits.
    pub fn bits(&self) -> u32 {
        (self.digits as f64 * BITS_PER_DIGIT).ceil() as u32 + 8
    }

    /// Same tolerance exponent, `extra` more digits of working precision.
    pub fn with_guard(&self, extra: u32) -> Self {
        PrecisionContext {
            digits: self.digits + extra,
            sign_tol_exponent: self.sign_tol_exponent,
        }
    }

    /// `10^(-exponent)` at this precision.
    pub fn pow10_neg(&self, exponent: u32) -> Float {
        let ten = Float::with_val(self.bits(), 10);
        ten.pow(-(exponent as i32))
    }

    /// The relative zero threshold `10^(-sign_tol_exponent)`.
    pub fn zero_threshold(&self) -> Float {
        self.pow10_neg(self.sign_tol_exponent)
    }

    pub fn float<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn scalar<T>(&self, value: T) -> BigScalar
    where
        Float: rug::Assign<T>,
    {
        BigScalar {
            value: self.float(value),
            ctx: *self,
        }
    }

    pub fn zero(&self) -> BigScalar {
        self.scalar(0)
    }

    pub fn one(&self) -> BigScalar {
        self.scalar(1)
    }

    /// Parse a decimal string exactly (up to the context precision), avoiding
    /// any detour through binary floating point.
    pub fn parse(&self, text: &str) -> Result<BigScalar> {
        let trimmed = text.trim();
        let parsed = Float::parse(trimmed)
            .map_err(|e| Error::Parse(format!("'{trimmed}' is not a number: {e}")))?;
        let value = Float::with_val(self.bits(), parsed);
        if !value.is_finite() {
            return Err(Error::Parse(format!("'{trimmed}' is not finite")));
        }
        Ok(BigScalar { value, ctx: *self })
    }

    pub fn from_rational(&self, q: &Rational) -> BigScalar {
        self.scalar(q)
    }

    /// Round an arbitrary float into this context.
    pub fn from_float(&self, value: &Float) -> BigScalar {
        BigScalar {
            value: Float::with_val(self.bits(), value),
            ctx: *self,
        }
    }
}

/// Arbitrary-precision real bound to the [`PrecisionContext`] it was made in.
#[derive(Clone, Debug, PartialEq)]
pub struct BigScalar {
    value: Float,
    ctx: PrecisionContext,
}

impl BigScalar {
    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn into_float(self) -> Float {
        self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// Decimal representation with `sig` significant digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        self.value.to_string_radix(10, Some(sig.max(1)))
    }

    pub fn same_context(&self, other: &BigScalar) -> Result<()> {
        check_same(self.ctx, other.ctx)
    }

    /// Re-express at another precision. Explicit only; arithmetic never does
    /// this implicitly.
    pub fn rebind(&self, ctx: PrecisionContext) -> BigScalar {
        ctx.from_float(&self.value)
    }

    pub fn checked_add(&self, other: &BigScalar) -> Result<BigScalar> {
        self.same_context(other)?;
        Ok(self.with(Float::with_val(self.ctx.bits(), &self.value + &other.value)))
    }

    pub fn checked_sub(&self, other: &BigScalar) -> Result<BigScalar> {
        self.same_context(other)?;
        Ok(self.with(Float::with_val(self.ctx.bits(), &self.value - &other.value)))
    }

    pub fn checked_mul(&self, other: &BigScalar) -> Result<BigScalar> {
        self.same_context(other)?;
        Ok(self.with(Float::with_val(self.ctx.bits(), &self.value * &other.value)))
    }

    pub fn checked_div(&self, other: &BigScalar) -> Result<BigScalar> {
        self.same_context(other)?;
        if other.value.is_zero() {
            return Err(Error::InvalidArgument("division by zero".into()));
        }
        Ok(self.with(Float::with_val(self.ctx.bits(), &self.value / &other.value)))
    }

    pub fn neg(&self) -> BigScalar {
        self.with(Float::with_val(self.ctx.bits(), -&self.value))
    }

    pub fn abs(&self) -> BigScalar {
        self.with(Float::with_val(self.ctx.bits(), self.value.abs_ref()))
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.value.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.value.cmp0() == Some(Ordering::Less)
    }

    /// Value comparison; both operands must share a context.
    pub fn compare(&self, other: &BigScalar) -> Result<Ordering> {
        self.same_context(other)?;
        Ok(self
            .value
            .partial_cmp(&other.value)
            .unwrap_or(Ordering::Equal))
    }

    fn with(&self, value: Float) -> BigScalar {
        BigScalar {
            value,
            ctx: self.ctx,
        }
    }
}

impl fmt::Display for BigScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or(self.ctx.digits as usize);
        f.write_str(&self.to_decimal(sig))
    }
}

impl Serialize for BigScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_decimal(self.ctx.digits as usize))
    }
}

fn check_same(a: PrecisionContext, b: PrecisionContext) -> Result<()> {
    if a.digits != b.digits {
        return Err(Error::MixedPrecision {
            left: a.digits,
            right: b.digits,
        });
    }
    Ok(())
}

/// Strictly decreasing, non-empty sequence of scalars sharing one context.
#[derive(Clone, Debug, PartialEq)]
pub struct DescendingTuple(Vec<BigScalar>);

impl DescendingTuple {
    pub fn new(values: Vec<BigScalar>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("descending tuple must be non-empty".into()));
        }
        let ctx = values[0].ctx;
        for (i, pair) in values.windows(2).enumerate() {
            check_same(ctx, pair[1].ctx)?;
            if pair[0].value <= pair[1].value {
                return Err(Error::NotDescending(i + 1));
            }
        }
        Ok(DescendingTuple(values))
    }

    pub fn from_strs(ctx: &PrecisionContext, values: &[&str]) -> Result<Self> {
        let parsed = values
            .iter()
            .map(|s| ctx.parse(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }

    pub fn from_f64s(ctx: &PrecisionContext, values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| ctx.scalar(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[BigScalar] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &BigScalar {
        &self.0[i]
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.0[0].ctx
    }

    /// Sub-tuple at the given increasing positions.
    pub fn select(&self, indices: &[usize]) -> Result<DescendingTuple> {
        check_indices(indices, self.len(), "tuple")?;
        Ok(DescendingTuple(
            indices.iter().map(|&i| self.0[i].clone()).collect(),
        ))
    }
}

impl Serialize for DescendingTuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

/// Kernel evaluated on a grid: `entries[i][j] = w(rows[i], cols[j])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelMatrix {
    rows: DescendingTuple,
    cols: DescendingTuple,
    entries: Vec<Vec<BigScalar>>,
}

impl KernelMatrix {
    pub fn new(
        rows: DescendingTuple,
        cols: DescendingTuple,
        entries: Vec<Vec<BigScalar>>,
    ) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::Dimension(format!(
                "entries do not form a {}x{} grid",
                rows.len(),
                cols.len()
            )));
        }
        let ctx = rows.ctx();
        check_same(ctx, cols.ctx())?;
        for v in entries.iter().flatten() {
            check_same(ctx, v.ctx)?;
        }
        Ok(KernelMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Build by evaluating `kernel` at every grid point.
    pub fn from_fn<F>(rows: DescendingTuple, cols: DescendingTuple, mut kernel: F) -> Result<Self>
    where
        F: FnMut(&BigScalar, &BigScalar) -> Result<BigScalar>,
    {
        let entries = rows
            .values()
            .iter()
            .map(|r| cols.values().iter().map(|c| kernel(r, c)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> &DescendingTuple {
        &self.rows
    }

    pub fn cols(&self) -> &DescendingTuple {
        &self.cols
    }

    pub fn entries(&self) -> &[Vec<BigScalar>] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigScalar {
        &self.entries[i][j]
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.rows.ctx()
    }

    pub fn det(&self) -> Result<BigScalar> {
        det(&self.entries)
    }

    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Result<BigScalar> {
        minor(&self.entries, rows, cols)
    }
}

/// Sign verdict for a single value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    /// `(-1)^(s(s-1)/2)`, the sign a reverse-rule kernel carries on size-`s` minors.
    pub fn reverse_rule(size: usize) -> Sign {
        if (size * size.saturating_sub(1) / 2).is_multiple_of(2) {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::Zero => "zero",
        };
        f.write_str(s)
    }
}

/// Zero iff `|v| < 10^(-sign_tol_exponent) * scale`, else the sign of `v`.
pub fn sign_classify(v: &BigScalar, scale: &BigScalar, ctx: &PrecisionContext) -> Result<Sign> {
    if !scale.is_positive() {
        return Err(Error::InvalidArgument(
            "sign classification needs a positive scale".into(),
        ));
    }
    let threshold = Float::with_val(ctx.bits(), ctx.zero_threshold() * scale.value());
    if Float::with_val(ctx.bits(), v.value.abs_ref()) < threshold {
        return Ok(Sign::Zero);
    }
    Ok(if v.is_negative() {
        Sign::Negative
    } else {
        Sign::Positive
    })
}

/// Product of the Euclidean row norms (Hadamard bound on `|det|`). Rows that
/// vanish identically contribute a factor of one; their determinant is exactly
/// zero regardless of scale.
pub fn hadamard_scale(grid: &[Vec<BigScalar>]) -> Result<BigScalar> {
    let ctx = grid_context(grid)?;
    let bits = ctx.bits();
    let mut scale = Float::with_val(bits, 1);
    for row in grid {
        let mut sq = Float::with_val(bits, 0);
        for v in row {
            sq += Float::with_val(bits, v.value.square_ref());
        }
        if !sq.is_zero() {
            scale *= sq.sqrt();
        }
    }
    Ok(ctx.from_float(&scale))
}

fn grid_context(grid: &[Vec<BigScalar>]) -> Result<PrecisionContext> {
    let first = grid
        .iter()
        .flatten()
        .next()
        .ok_or_else(|| Error::Dimension("empty matrix".into()))?;
    let ctx = first.ctx;
    for v in grid.iter().flatten() {
        check_same(ctx, v.ctx)?;
    }
    Ok(ctx)
}

fn check_square(grid: &[Vec<BigScalar>]) -> Result<usize> {
    let n = grid.len();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    for row in grid {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
    }
    Ok(n)
}

/// Determinant of a square grid.
///
/// Integer-valued grids are reduced exactly (Bareiss); everything else by
/// Gaussian elimination with partial pivoting at the context precision. The
/// result is a deterministic function of the inputs.
pub fn det(grid: &[Vec<BigScalar>]) -> Result<BigScalar> {
    let n = check_square(grid)?;
    let ctx = grid_context(grid)?;

    if grid.iter().flatten().all(|v| v.value.is_integer()) {
        let ints: Vec<Vec<Integer>> = grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.value.to_integer().expect("finite integer entry"))
                    .collect()
            })
            .collect();
        return Ok(ctx.scalar(&det_integer(ints)));
    }

    let bits = ctx.bits();
    let mut a: Vec<Vec<Float>> = grid
        .iter()
        .map(|row| row.iter().map(|v| Float::with_val(bits, &v.value)).collect())
        .collect();
    let mut det = Float::with_val(bits, 1);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .cmp_abs(&a[j][col])
                    .unwrap_or(Ordering::Equal)
                    // ties resolve to the lowest row index
                    .then(j.cmp(&i))
            })
            .expect("non-empty pivot range");
        if a[pivot][col].is_zero() {
            return Ok(ctx.zero());
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= &a[col][col];
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = Float::with_val(bits, &row[col] / &pivot_row[col]);
            for k in col + 1..n {
                let t = Float::with_val(bits, &factor * &pivot_row[k]);
                row[k] -= t;
            }
        }
    }
    Ok(ctx.from_float(&det))
}

/// Fraction-free (Bareiss) determinant of an integer matrix.
pub fn det_integer(mut a: Vec<Vec<Integer>>) -> Integer {
    let n = a.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = Integer::from(&a[i][j] * &a[k][k]) - Integer::from(&a[i][k] * &a[k][j]);
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Exact determinant of a rational matrix by Gaussian elimination over Q.
pub fn det_rational(grid: &[Vec<Rational>]) -> Result<Rational> {
    let n = grid.len();
    if grid.iter().any(|r| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: grid.first().map_or(0, |r| r.len()),
        });
    }
    let mut a: Vec<Vec<Rational>> = grid.to_vec();
    let mut det = Rational::from(1);
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&i| a[i][col] != 0) else {
            return Ok(Rational::new());
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= &a[col][col];
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            if row[col] == 0 {
                continue;
            }
            let factor = Rational::from(&row[col] / &pivot_row[col]);
            for k in col + 1..n {
                let t = Rational::from(&factor * &pivot_row[k]);
                row[k] -= t;
            }
        }
    }
    Ok(det)
}

fn check_indices(indices: &[usize], bound: usize, what: &str) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Index(format!("empty {what} index list")));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= bound) {
        return Err(Error::Index(format!(
            "{what} index {bad} out of range (size {bound})"
        )));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Index(format!(
            "{what} indices must be strictly increasing"
        )));
    }
    Ok(())
}

/// Submatrix at the given rows and columns.
pub fn submatrix(
    grid: &[Vec<BigScalar>],
    rows: &[usize],
    cols: &[usize],
) -> Result<Vec<Vec<BigScalar>>> {
    if rows.len() != cols.len() {
        return Err(Error::Index(format!(
            "{} row indices but {} column indices",
            rows.len(),
            cols.len()
        )));
    }
    let width = grid.first().map_or(0, |r| r.len());
    check_indices(rows, grid.len(), "row")?;
    check_indices(cols, width, "column")?;
    Ok(rows
        .iter()
        .map(|&i| cols.iter().map(|&j| grid[i][j].clone()).collect())
        .collect())
}

/// Determinant of the submatrix selected by `rows` x `cols`.
pub fn minor(grid: &[Vec<BigScalar>], rows: &[usize], cols: &[usize]) -> Result<BigScalar> {
    det(&submatrix(grid, rows, cols)?)
}

/// All strictly increasing `size`-subsets of `0..n`, in lexicographic order.
pub fn index_subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - left {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        rec(0, n, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}
