//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rug::{Float, Integer, Rational};

/// Sparse multivariate polynomial: exponent vector to integer coefficient.
pub type Poly = BTreeMap<Vec<u32>, Integer>;

fn add_term(p: &mut Poly, mono: Vec<u32>, c: Integer) {
    let entry = p.entry(mono.clone()).or_default();
    *entry += c;
    if *entry == 0 {
        p.remove(&mono);
    }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut all = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut all);
    all.into_iter()
        .map(|p| {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            (p, sign)
        })
        .collect()
}

/// `det(t_j^(e_i))` expanded by the Leibniz formula.
pub fn alternant(exponents: &[u32]) -> Poly {
    let m = exponents.len();
    let mut p = Poly::new();
    for (perm, sign) in permutations(m) {
        let mut mono = vec![0u32; m];
        for (i, &j) in perm.iter().enumerate() {
            mono[j] = exponents[i];
        }
        add_term(&mut p, mono, Integer::from(sign));
    }
    p
}

/// Exact quotient by `t_i - t_j` (`i < j`) using lex order with `t_0 > t_1 > ...`.
pub fn divide_by_difference(mut p: Poly, i: usize, j: usize) -> Poly {
    assert!(i < j);
    let mut q = Poly::new();
    while let Some((mono, coeff)) = p.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
        assert!(mono[i] > 0, "division by t_{i} - t_{j} is not exact");
        let mut qm = mono.clone();
        qm[i] -= 1;
        add_term(&mut q, qm.clone(), coeff.clone());
        add_term(&mut p, mono, -coeff.clone());
        let mut shifted = qm;
        shifted[j] += 1;
        add_term(&mut p, shifted, coeff);
    }
    q
}

/// Schur polynomial in `theta.len()` variables by exact division of the
/// bialternant numerator by the Vandermonde factors.
pub fn schur_symbolic(theta: &[u32]) -> Poly {
    let m = theta.len();
    let exps: Vec<u32> = (0..m).map(|i| theta[i] + (m - 1 - i) as u32).collect();
    let mut p = alternant(&exps);
    for i in 0..m {
        for j in i + 1..m {
            p = divide_by_difference(p, i, j);
        }
    }
    p
}

/// Monomial expansion of the Schur polynomial as a generating function of
/// semistandard tableaux of shape `theta` with entries in `0..m`.
pub fn schur_tableaux(theta: &[u32], m: usize) -> Poly {
    let cells: Vec<(usize, usize)> = theta
        .iter()
        .enumerate()
        .flat_map(|(r, &len)| (0..len as usize).map(move |c| (r, c)))
        .collect();
    let mut filling: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut out = Poly::new();
    fn rec(
        k: usize,
        cells: &[(usize, usize)],
        m: usize,
        filling: &mut BTreeMap<(usize, usize), usize>,
        out: &mut Poly,
    ) {
        if k == cells.len() {
            let mut mono = vec![0u32; m];
            for v in filling.values() {
                mono[*v] += 1;
            }
            add_term(out, mono, Integer::from(1));
            return;
        }
        let (r, c) = cells[k];
        let lo_row = if c > 0 { filling[&(r, c - 1)] } else { 0 };
        let lo_col = if r > 0 { filling[&(r - 1, c)] + 1 } else { 0 };
        for v in lo_row.max(lo_col)..m {
            filling.insert((r, c), v);
            rec(k + 1, cells, m, filling, out);
            filling.remove(&(r, c));
        }
    }
    rec(0, &cells, m, &mut filling, &mut out);
    out
}

pub fn poly_eval(p: &Poly, t: &[Float], bits: u32) -> Float {
    let mut acc = Float::with_val(bits, 0);
    for (mono, c) in p {
        let mut term = Float::with_val(bits, c);
        for (ti, &e) in t.iter().zip(mono) {
            term *= Float::with_val(bits, rug::ops::Pow::pow(ti, e));
        }
        acc += term;
    }
    acc
}

/// Every partition of `weight` into at most `m` parts, padded to length `m`.
pub fn partitions_exact(weight: u32, m: usize) -> Vec<Vec<u32>> {
    fn rec(left: usize, cap: u32, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if budget == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for p in (0..=cap.min(budget)).rev() {
            cur.push(p);
            rec(left - 1, p, budget - p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, weight, weight, &mut Vec::new(), &mut out);
    out
}

/// Determinant by the Leibniz expansion, exact over the rationals.
pub fn leibniz_det(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    let mut total = Rational::new();
    for (perm, sign) in permutations(n) {
        let mut term = Rational::from(sign);
        for (i, &j) in perm.iter().enumerate() {
            term *= &a[i][j];
        }
        total += term;
    }
    total
}

/// Count of set partitions of an `n`-set into exactly `k` blocks, by
/// enumerating restricted growth strings.
pub fn set_partitions(n: usize, k: usize) -> u64 {
    fn rec(pos: usize, n: usize, used: usize, k: usize) -> u64 {
        if pos == n {
            return (used == k) as u64;
        }
        (0..=used.min(k - 1))
            .map(|b| rec(pos + 1, n, used.max(b + 1), k))
            .sum()
    }
    if k == 0 {
        return (n == 0) as u64;
    }
    rec(0, n, 0, k)
}

/// Relative difference `|a - b| / max(|b|, tiny)`.
pub fn rel_diff(a: &Float, b: &Float) -> f64 {
    let bits = a.prec().max(b.prec());
    let d = Float::with_val(bits, a - b).abs();
    let s = Float::with_val(bits, b.abs_ref()).max(&Float::with_val(bits, 1e-300));
    (d / s).to_f64()
}

/// Uniform decimal string in `[lo, hi]` with `places` fractional digits, so
/// tests parse exact decimals rather than binary doubles.
pub fn decimal<R: rand::Rng>(rng: &mut R, lo: f64, hi: f64, places: u32) -> String {
    let scale = 10f64.powi(places as i32);
    let a = (lo * scale).ceil() as i64;
    let b = (hi * scale).floor() as i64;
    let n = rng.gen_range(a..=b);
    let sign = if n < 0 { "-" } else { "" };
    let n = n.unsigned_abs();
    let div = 10u64.pow(places);
    format!("{sign}{}.{:0width$}", n / div, n % div, width = places as usize)
}

/// `r` distinct decimals from [lo, hi], sorted into descending order.
pub fn descending_decimals<R: rand::Rng>(
    rng: &mut R,
    r: usize,
    lo: f64,
    hi: f64,
    places: u32,
) -> Vec<String> {
    let mut seen: Vec<(f64, String)> = Vec::new();
    while seen.len() < r {
        let s = decimal(rng, lo, hi, places);
        let v: f64 = s.parse().unwrap();
        if seen.iter().all(|(w, _)| *w != v) {
            seen.push((v, s));
        }
    }
    seen.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    seen.into_iter().map(|(_, s)| s).collect()
}

pub fn tuple(
    ctx: &totalpos::numkernel::PrecisionContext,
    values: &[String],
) -> totalpos::numkernel::DescendingTuple {
    let refs: Vec<&str> = values.iter().map(String::as_str).collect();
    totalpos::numkernel::DescendingTuple::from_strs(ctx, &refs).unwrap()
}
