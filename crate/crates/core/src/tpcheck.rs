//! Sampled total-positivity classification and counterexample search.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numkernel::{
    hadamard_scale, index_subsets, sign_classify, submatrix, BigScalar, DescendingTuple,
    KernelMatrix, PrecisionContext, Sign,
};
use crate::weights::{self, WeightFunctionSpec};

/// Extra digits used to re-check a witness from scratch.
pub const WITNESS_GUARD_DIGITS: u32 = 40;

/// Minimum gap between consecutive sampled coordinates, relative to the
/// region width.
const MIN_RELATIVE_SPREAD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Tp,
    Stp,
    Rr,
    Srr,
}

impl Property {
    pub fn is_reverse(self) -> bool {
        matches!(self, Property::Rr | Property::Srr)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Property::Stp | Property::Srr)
    }

    /// Sign a size-`size` minor must have after the reverse-rule adjustment.
    pub fn oriented(self, sign: Sign, size: usize) -> Sign {
        if self.is_reverse() {
            match Sign::reverse_rule(size) {
                Sign::Negative => sign.flip(),
                _ => sign,
            }
        } else {
            sign
        }
    }

    pub fn accepts(self, sign: Sign, size: usize) -> bool {
        match self.oriented(sign, size) {
            Sign::Positive => true,
            Sign::Zero => !self.is_strict(),
            Sign::Negative => false,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Tp => "TP",
            Property::Stp => "STP",
            Property::Rr => "RR",
            Property::Srr => "SRR",
        })
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tp" => Ok(Property::Tp),
            "stp" => Ok(Property::Stp),
            "rr" => Ok(Property::Rr),
            "srr" => Ok(Property::Srr),
            other => Err(Error::Parse(format!("unknown property '{other}'"))),
        }
    }
}

/// One classified minor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorRecord {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: BigScalar,
    /// Hadamard bound of the submatrix, the reference for zero classification.
    pub scale: BigScalar,
    #[serde(serialize_with = "display")]
    pub sign: Sign,
}

fn display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl MinorRecord {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// `value / scale`, multiplied by `(-1)^(s(s-1)/2)` when `reverse`.
    pub fn normalized(&self, reverse: bool) -> BigScalar {
        let bits = self.value.ctx().bits();
        let mut q = Float::with_val(bits, self.value.value() / self.scale.value());
        if reverse && Sign::reverse_rule(self.size()) == Sign::Negative {
            q = -q;
        }
        self.value.ctx().from_float(&q)
    }
}

/// Every minor of a kernel matrix with its sign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignReport {
    pub matrix: KernelMatrix,
    pub minors: Vec<MinorRecord>,
    /// Whether signs are read against `(-1)^(s(s-1)/2)`.
    pub rr_signed: bool,
}

impl SignReport {
    /// Classify all minors of every size `1..=min(rows, cols)`, ordered by
    /// size then lexicographically by row and column sets.
    pub fn from_matrix(matrix: KernelMatrix, rr_signed: bool) -> Result<Self> {
        let ctx = matrix.ctx();
        let n = matrix.rows().len();
        let m = matrix.cols().len();
        let mut minors = Vec::new();
        for size in 1..=n.min(m) {
            let row_sets = index_subsets(n, size);
            let col_sets = index_subsets(m, size);
            for rows in &row_sets {
                for cols in &col_sets {
                    let sub = submatrix(matrix.entries(), rows, cols)?;
                    let value = crate::numkernel::det(&sub)?;
                    let scale = hadamard_scale(&sub)?;
                    let sign = sign_classify(&value, &scale, &ctx)?;
                    minors.push(MinorRecord {
                        rows: rows.clone(),
                        cols: cols.clone(),
                        value,
                        scale,
                        sign,
                    });
                }
            }
        }
        Ok(SignReport {
            matrix,
            minors,
            rr_signed,
        })
    }

    /// The full determinant when the matrix is square.
    pub fn det(&self) -> Option<&MinorRecord> {
        let n = self.matrix.rows().len();
        if n != self.matrix.cols().len() {
            return None;
        }
        self.minors.last().filter(|mr| mr.size() == n)
    }

    /// Violating minors, largest size first.
    pub fn violations(&self, property: Property) -> Vec<&MinorRecord> {
        let mut out: Vec<&MinorRecord> = self
            .minors
            .iter()
            .filter(|mr| !property.accepts(mr.sign, mr.size()))
            .collect();
        out.sort_by_key(|m| std::cmp::Reverse(m.size()));
        out
    }

    pub fn satisfies(&self, property: Property) -> bool {
        self.minors
            .iter()
            .all(|mr| property.accepts(mr.sign, mr.size()))
    }

    /// Smallest oriented normalized minor.
    pub fn worst(&self, property: Property) -> Option<(&MinorRecord, BigScalar)> {
        let reverse = property.is_reverse();
        let mut best: Option<(&MinorRecord, BigScalar)> = None;
        for mr in &self.minors {
            let q = mr.normalized(reverse);
            let better = match &best {
                None => true,
                Some((_, b)) => q.value() < b.value(),
            };
            if better {
                best = Some((mr, q));
            }
        }
        best
    }
}

/// Rectangle in `(lambda, x)`, optionally cut by `lambda * x < b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub lambda: (BigScalar, BigScalar),
    pub x: (BigScalar, BigScalar),
    pub product_below: Option<BigScalar>,
}

impl Region {
    pub fn new(lambda: (BigScalar, BigScalar), x: (BigScalar, BigScalar)) -> Result<Self> {
        for (lo, hi) in [&lambda, &x] {
            lo.same_context(hi)?;
            if lo.compare(hi)? != std::cmp::Ordering::Less {
                return Err(Error::InvalidArgument(format!(
                    "empty interval [{lo}, {hi}]"
                )));
            }
        }
        lambda.0.same_context(&x.0)?;
        Ok(Region {
            lambda,
            x,
            product_below: None,
        })
    }

    pub fn rectangle(
        ctx: &PrecisionContext,
        lambda: (&str, &str),
        x: (&str, &str),
    ) -> Result<Self> {
        Region::new(
            (ctx.parse(lambda.0)?, ctx.parse(lambda.1)?),
            (ctx.parse(x.0)?, ctx.parse(x.1)?),
        )
    }

    pub fn with_product_below(mut self, bound: BigScalar) -> Result<Self> {
        bound.same_context(&self.lambda.0)?;
        if !bound.is_positive() {
            return Err(Error::InvalidArgument(
                "product bound must be positive".into(),
            ));
        }
        self.product_below = Some(bound);
        Ok(self)
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.lambda.0.ctx()
    }

    /// Default sampling rectangle for a family. `restricted` applies the
    /// family's strictly-positive sub-region when it has one.
    pub fn default_for(
        spec: &WeightFunctionSpec,
        ctx: &PrecisionContext,
        restricted: bool,
    ) -> Result<Self> {
        use crate::weights::Family;
        let region = match spec.family {
            Family::Esscher | Family::AumannShapley(_) => {
                Region::rectangle(ctx, ("-2", "2"), ("-2", "2"))?
            }
            Family::Cte => Region::rectangle(ctx, ("0", "5"), ("0", "5"))?,
            Family::PseudoPoisson | Family::PseudoPoissonRaw => {
                Region::rectangle(ctx, ("0.1", "2"), ("0.1", "2"))?
            }
            Family::W6 => Region::rectangle(ctx, ("0.001", "10"), ("0.001", "10"))?,
            _ => Region::rectangle(ctx, ("0.1", "5"), ("0.1", "5"))?,
        };
        let region = if let Family::AumannShapley(crate::weights::Transform::Log1p) = spec.family
        {
            Region::rectangle(ctx, ("-2", "2"), ("0", "5"))?
        } else {
            region
        };
        match (restricted, spec.domain().stp_product_below) {
            (true, Some(b)) => region.with_product_below(ctx.scalar(b)),
            _ => Ok(region),
        }
    }

    pub fn contains(&self, lambda: &BigScalar, x: &BigScalar) -> bool {
        let inside = |v: &BigScalar, (lo, hi): &(BigScalar, BigScalar)| {
            v.value() >= lo.value() && v.value() <= hi.value()
        };
        if !inside(lambda, &self.lambda) || !inside(x, &self.x) {
            return false;
        }
        match &self.product_below {
            Some(b) => {
                let bits = lambda.ctx().bits();
                Float::with_val(bits, lambda.value() * x.value()) < *b.value()
            }
            None => true,
        }
    }

    /// True when every corner of the rectangle lies in the family's domain.
    pub fn within_domain(&self, spec: &WeightFunctionSpec) -> bool {
        let d = spec.domain();
        [&self.lambda.0, &self.lambda.1]
            .iter()
            .all(|l| [&self.x.0, &self.x.1].iter().all(|x| d.contains(l.value(), x.value())))
    }

    fn draw_tuple<R: Rng>(
        rng: &mut R,
        r: usize,
        lo: &BigScalar,
        hi: &BigScalar,
    ) -> Option<DescendingTuple> {
        let ctx = lo.ctx();
        let bits = ctx.bits();
        let width = Float::with_val(bits, hi.value() - lo.value());
        let mut vals: Vec<Float> = (0..r)
            .map(|_| {
                let u: f64 = rng.gen();
                Float::with_val(bits, &width * u) + lo.value()
            })
            .collect();
        vals.sort_by(|a, b| b.partial_cmp(a).expect("finite draws"));
        let min_gap = Float::with_val(bits, &width * MIN_RELATIVE_SPREAD);
        if vals
            .windows(2)
            .any(|w| Float::with_val(bits, &w[0] - &w[1]) < min_gap)
        {
            return None;
        }
        DescendingTuple::new(vals.iter().map(|v| ctx.from_float(v)).collect()).ok()
    }

    /// A pair of descending `r`-tuples drawn by sorting i.i.d. uniforms and
    /// rejecting near-ties. Under a product cut the `x` tuple is drawn
    /// uniformly below `b / lambda_1`, so every grid point satisfies the cut.
    pub fn sample_pair<R: Rng>(
        &self,
        rng: &mut R,
        r: usize,
    ) -> Result<(DescendingTuple, DescendingTuple)> {
        for _ in 0..10_000 {
            let Some(l) = Self::draw_tuple(rng, r, &self.lambda.0, &self.lambda.1) else {
                continue;
            };
            // under a product cut the x range shrinks to (x_lo, b / lambda_1)
            let x_hi = match &self.product_below {
                Some(b) if l.get(0).is_positive() => {
                    let bits = l.ctx().bits();
                    let cap = Float::with_val(bits, b.value() / l.get(0).value());
                    if cap <= *self.x.0.value() {
                        continue;
                    }
                    l.ctx().from_float(&cap.min(self.x.1.value()))
                }
                _ => self.x.1.clone(),
            };
            let Some(x) = Self::draw_tuple(rng, r, &self.x.0, &x_hi) else {
                continue;
            };
            if self.contains(l.get(0), x.get(0)) && self.contains(l.get(r - 1), x.get(r - 1)) {
                return Ok((l, x));
            }
        }
        Err(Error::InvalidArgument(
            "region too thin to sample descending tuples".into(),
        ))
    }
}

/// `entries[i][j] = w(lambda_i, x_j)`.
pub fn build_matrix(
    spec: &WeightFunctionSpec,
    lambdas: &DescendingTuple,
    xs: &DescendingTuple,
) -> Result<KernelMatrix> {
    KernelMatrix::from_fn(lambdas.clone(), xs.clone(), |l, x| weights::eval(spec, l, x))
}

/// A violating minor together with the grid that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub sample_index: usize,
    pub lambdas: DescendingTuple,
    pub xs: DescendingTuple,
    pub minor: MinorRecord,
    /// Oriented `value / scale`.
    pub normalized: BigScalar,
    /// Whether recomputation with extra guard digits reproduced the sign.
    pub reverified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    ConsistentAt(usize),
    ViolatedBy(Box<Witness>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TPVerdict {
    pub order_r: usize,
    pub property: Property,
    pub status: Status,
}

impl TPVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self.status, Status::ConsistentAt(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.status {
            Status::ViolatedBy(w) => Some(w),
            Status::ConsistentAt(_) => None,
        }
    }

    /// Human-readable outcome. Sampling never proves positivity, so a clean
    /// run says so explicitly.
    pub fn summary(&self) -> String {
        match &self.status {
            Status::ConsistentAt(n) => format!(
                "{}_{}: no violation found at {n} samples",
                self.property, self.order_r
            ),
            Status::ViolatedBy(w) => format!(
                "{}_{}: violated by a {}x{} minor of value {} at sample {}",
                self.property,
                self.order_r,
                w.minor.size(),
                w.minor.size(),
                w.minor.value.to_decimal(12),
                w.sample_index
            ),
        }
    }
}

/// Recompute one minor from scratch with extra guard digits and classify it
/// with the original tolerance exponent.
pub fn reverify(
    spec: &WeightFunctionSpec,
    lambdas: &DescendingTuple,
    xs: &DescendingTuple,
    minor: &MinorRecord,
) -> Result<Sign> {
    let ctx = lambdas.ctx().with_guard(WITNESS_GUARD_DIGITS);
    let rebind = |t: &DescendingTuple, idx: &[usize]| {
        DescendingTuple::new(idx.iter().map(|&i| t.get(i).rebind(ctx)).collect())
    };
    let l = rebind(lambdas, &minor.rows)?;
    let x = rebind(xs, &minor.cols)?;
    let m = build_matrix(spec, &l, &x)?;
    let value = m.det()?;
    let scale = hadamard_scale(m.entries())?;
    sign_classify(&value, &scale, &ctx)
}

/// First violation in one sample, if any: the largest violating minor wins.
fn examine(
    spec: &WeightFunctionSpec,
    property: Property,
    index: usize,
    lambdas: &DescendingTuple,
    xs: &DescendingTuple,
) -> Result<Option<Witness>> {
    let report = SignReport::from_matrix(build_matrix(spec, lambdas, xs)?, property.is_reverse())?;
    for mr in report.violations(property) {
        let again = reverify(spec, lambdas, xs, mr)?;
        // a sign that flips under extra precision is a rounding artifact
        if property.accepts(again, mr.size()) {
            continue;
        }
        return Ok(Some(Witness {
            sample_index: index,
            lambdas: lambdas.clone(),
            xs: xs.clone(),
            normalized: mr.normalized(property.is_reverse()),
            minor: mr.clone(),
            reverified: again == mr.sign,
        }));
    }
    Ok(None)
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn validate(spec: &WeightFunctionSpec, region: &Region, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("order r must be at least 1".into()));
    }
    if !region.within_domain(spec) {
        return Err(Error::InvalidArgument(format!(
            "region extends outside the domain of {spec}"
        )));
    }
    Ok(())
}

/// Sampled check of `property` up to order `r`.
///
/// `seeded` grids are examined first (as sample indices `0..seeded.len()`),
/// then `samples` random grids drawn from per-index generator streams. The
/// reported witness is the one with the lowest index, so the verdict does not
/// depend on how work is scheduled across threads.
pub fn check_order(
    spec: &WeightFunctionSpec,
    region: &Region,
    property: Property,
    r: usize,
    samples: usize,
    rng_seed: u64,
    seeded: &[(DescendingTuple, DescendingTuple)],
) -> Result<TPVerdict> {
    validate(spec, region, r)?;
    for (l, x) in seeded {
        if l.len() != r || x.len() != r {
            return Err(Error::Dimension(format!(
                "seeded grid sizes ({}, {}) differ from order {r}",
                l.len(),
                x.len()
            )));
        }
    }
    let total = seeded.len() + samples;
    let found = (0..total).into_par_iter().map(|i| -> Result<Option<Witness>> {
        let (l, x) = if i < seeded.len() {
            seeded[i].clone()
        } else {
            region.sample_pair(&mut sample_rng(rng_seed, i - seeded.len()), r)?
        };
        examine(spec, property, i, &l, &x)
    });
    let first = found.find_map_first(|res| match res {
        Ok(None) => None,
        other => Some(other),
    });
    let status = match first {
        None => Status::ConsistentAt(total),
        Some(Ok(Some(w))) => Status::ViolatedBy(Box::new(w)),
        Some(Err(e)) => return Err(e),
        Some(Ok(None)) => unreachable!("filtered above"),
    };
    Ok(TPVerdict {
        order_r: r,
        property,
        status,
    })
}

fn score(
    spec: &WeightFunctionSpec,
    property: Property,
    l: &DescendingTuple,
    x: &DescendingTuple,
) -> Result<Float> {
    let report = SignReport::from_matrix(build_matrix(spec, l, x)?, property.is_reverse())?;
    let (_, q) = report.worst(property).expect("at least one minor");
    Ok(q.into_float())
}

fn perturb(
    region: &Region,
    l: &DescendingTuple,
    x: &DescendingTuple,
    coord: usize,
    delta: &Float,
) -> Option<(DescendingTuple, DescendingTuple)> {
    let r = l.len();
    let (target, other, i, bounds) = if coord < r {
        (l, x, coord, &region.lambda)
    } else {
        (x, l, coord - r, &region.x)
    };
    let ctx = l.ctx();
    let bits = ctx.bits();
    let moved = Float::with_val(bits, target.get(i).value() + delta);
    if moved < *bounds.0.value() || moved > *bounds.1.value() {
        return None;
    }
    let mut vals = target.values().to_vec();
    vals[i] = ctx.from_float(&moved);
    let width = Float::with_val(bits, bounds.1.value() - bounds.0.value());
    let min_gap = Float::with_val(bits, &width * MIN_RELATIVE_SPREAD);
    if vals
        .windows(2)
        .any(|w| Float::with_val(bits, w[0].value() - w[1].value()) < min_gap)
    {
        return None;
    }
    let changed = DescendingTuple::new(vals).ok()?;
    let (nl, nx) = if coord < r {
        (changed, other.clone())
    } else {
        (other.clone(), changed)
    };
    if !region.contains(nl.get(0), nx.get(0)) {
        return None;
    }
    Some((nl, nx))
}

/// Random search followed by coordinatewise refinement of the most nearly
/// violating grids. Returns the witness with the most negative oriented
/// normalized minor, or `None` when no violation turns up within `budget`
/// kernel-matrix evaluations.
pub fn search_counterexample(
    spec: &WeightFunctionSpec,
    region: &Region,
    property: Property,
    r: usize,
    budget: usize,
    rng_seed: u64,
) -> Result<Option<Witness>> {
    validate(spec, region, r)?;
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let random_phase = budget.div_ceil(2);
    let scored: Vec<(usize, DescendingTuple, DescendingTuple, Float)> = (0..random_phase)
        .into_par_iter()
        .map(|i| {
            let (l, x) = region.sample_pair(&mut sample_rng(rng_seed, i), r)?;
            let s = score(spec, property, &l, &x)?;
            Ok((i, l, x, s))
        })
        .collect::<Result<_>>()?;
    let mut ranked = scored;
    ranked.sort_by(|a, b| a.3.partial_cmp(&b.3).expect("finite scores").then(a.0.cmp(&b.0)));
    let keep = ranked.len().min(8);
    let mut remaining = budget - random_phase;
    let per_candidate = remaining / keep.max(1);
    let bits = region.ctx().bits();

    let mut candidates: Vec<(usize, DescendingTuple, DescendingTuple, Float)> = Vec::new();
    for (idx, l0, x0, s0) in ranked.into_iter().take(keep) {
        let (mut l, mut x, mut s) = (l0, x0, s0);
        let mut spent = 0;
        let mut steps: Vec<Float> = (0..2 * r)
            .map(|c| {
                let b = if c < r { &region.lambda } else { &region.x };
                Float::with_val(bits, b.1.value() - b.0.value()) / 10u32
            })
            .collect();
        'refine: while spent < per_candidate && remaining > 0 {
            let mut improved = false;
            for c in 0..2 * r {
                for dir in [1i32, -1] {
                    if spent >= per_candidate || remaining == 0 {
                        break 'refine;
                    }
                    let delta = Float::with_val(bits, &steps[c] * dir);
                    let Some((nl, nx)) = perturb(region, &l, &x, c, &delta) else {
                        continue;
                    };
                    spent += 1;
                    remaining -= 1;
                    let ns = score(spec, property, &nl, &nx)?;
                    if ns < s {
                        l = nl;
                        x = nx;
                        s = ns;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                for st in steps.iter_mut() {
                    *st /= 2u32;
                }
                if steps[0] < Float::with_val(bits, Float::i_exp(1, -60)) {
                    break;
                }
            }
        }
        candidates.push((idx, l, x, s));
    }
    candidates.sort_by(|a, b| a.3.partial_cmp(&b.3).expect("finite scores").then(a.0.cmp(&b.0)));
    for (idx, l, x, _) in candidates {
        if let Some(w) = examine(spec, property, idx, &l, &x)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Family;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn tuple(c: &PrecisionContext, v: &[&str]) -> DescendingTuple {
        DescendingTuple::from_strs(c, v).unwrap()
    }

    #[test]
    fn indicator_matrix() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::Cte);
        let m = build_matrix(&spec, &tuple(&c, &["2", "1"]), &tuple(&c, &["3", "1.5"])).unwrap();
        let vals: Vec<Vec<f64>> = m
            .entries()
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64()).collect())
            .collect();
        assert_eq!(vals, vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn esscher_matrix() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::Esscher);
        let m = build_matrix(&spec, &tuple(&c, &["1", "0"]), &tuple(&c, &["1", "0"])).unwrap();
        let e = c.float(1).exp();
        assert_eq!(m.entry(0, 0).value(), &e);
        assert_eq!(m.entry(0, 1), &c.one());
        assert_eq!(m.entry(1, 1), &c.one());
    }

    #[test]
    fn out_of_domain_rejected() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::Kamps);
        assert!(build_matrix(&spec, &tuple(&c, &["1", "-1"]), &tuple(&c, &["1", "0.5"])).is_err());
        let region = Region::rectangle(&c, ("-1", "1"), ("0.1", "1")).unwrap();
        assert!(check_order(&spec, &region, Property::Tp, 2, 5, 1, &[]).is_err());
    }

    #[test]
    fn property_orientation() {
        assert!(Property::Rr.accepts(Sign::Negative, 2));
        assert!(Property::Rr.accepts(Sign::Negative, 3));
        assert!(Property::Rr.accepts(Sign::Positive, 4));
        assert!(!Property::Srr.accepts(Sign::Zero, 1));
        assert!(Property::Tp.accepts(Sign::Zero, 3));
        assert!(!Property::Stp.accepts(Sign::Zero, 3));
        assert_eq!("SRR".parse::<Property>().unwrap(), Property::Srr);
    }

    #[test]
    fn report_lists_all_minors() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::Esscher);
        let m = build_matrix(&spec, &tuple(&c, &["1", "0.5", "0"]), &tuple(&c, &["2", "1", "0"]))
            .unwrap();
        let report = SignReport::from_matrix(m, false).unwrap();
        assert_eq!(report.minors.len(), 9 + 9 + 1);
        assert!(report.satisfies(Property::Stp));
        assert_eq!(report.det().unwrap().size(), 3);
    }

    #[test]
    fn esscher_consistent() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::Esscher);
        let region = Region::default_for(&spec, &c, false).unwrap();
        let v = check_order(&spec, &region, Property::Stp, 3, 20, 7, &[]).unwrap();
        assert!(v.is_consistent());
        assert_eq!(v.summary(), "STP_3: no violation found at 20 samples");
    }

    #[test]
    fn indicator_tp_but_not_stp() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::Cte);
        let region = Region::default_for(&spec, &c, false).unwrap();
        assert!(check_order(&spec, &region, Property::Tp, 3, 30, 3, &[])
            .unwrap()
            .is_consistent());
        let stp = check_order(&spec, &region, Property::Stp, 3, 30, 3, &[]).unwrap();
        let w = stp.witness().expect("zero minors exist");
        assert_eq!(w.minor.sign, Sign::Zero);
    }

    #[test]
    fn verdict_is_seed_deterministic() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::W6);
        let region = Region::default_for(&spec, &c, false).unwrap();
        let a = check_order(&spec, &region, Property::Tp, 3, 200, 11, &[]).unwrap();
        let b = check_order(&spec, &region, Property::Tp, 3, 200, 11, &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_pairs_respect_product_cut() {
        let c = ctx();
        let spec = WeightFunctionSpec::new(Family::W6);
        let region = Region::default_for(&spec, &c, true).unwrap();
        for i in 0..50 {
            let (l, x) = region.sample_pair(&mut sample_rng(5, i), 3).unwrap();
            for li in l.values() {
                for xj in x.values() {
                    assert!(region.contains(li, xj));
                }
            }
        }
    }
}
