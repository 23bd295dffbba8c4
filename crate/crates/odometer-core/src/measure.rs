//! Product probability measures, certified rational interval arithmetic for
//! infinite products, the continuity condition on digit-probability ratios,
//! and non-atomicity checks.
//!
//! All verdict-bearing computation is exact rational. Infinite products are
//! enclosed by Weierstrass bounds: a finite partial product as the upper
//! end, and the partial product times `1 - (sum of remaining complements)`
//! as the lower end.

use crate::mixed_radix::{BaseSeq, Prefix};
use crate::report::{rat_str, ClaimReport, Verdict};
use crate::{pow2_inv, rat, Error, Result};
use num::{BigInt, BigRational};
use num_traits::{One, Signed, Zero};

/// A certified rational lower/upper bound pair. Arithmetic is outward exact
/// rational, hence correct by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        RatInterval { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        RatInterval { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::point(BigRational::one())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    /// `[a,b] - [c,d] = [a-d, b-c]`.
    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    /// Product of intervals with nonnegative endpoints.
    pub fn mul(&self, other: &Self) -> Self {
        assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Self::new(&self.lo * &other.lo, &self.hi * &other.hi)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        assert!(!c.is_negative());
        Self::new(&self.lo * c, &self.hi * c)
    }

    /// `1 - I`, the complement of a measure enclosure.
    pub fn one_minus(&self) -> Self {
        Self::new(BigRational::one() - &self.hi, BigRational::one() - &self.lo)
    }

    /// Clip the lower endpoint at zero (used after Weierstrass bounds).
    pub fn clamp_lo_zero(mut self) -> Self {
        if self.lo.is_negative() {
            self.lo = BigRational::zero();
        }
        self
    }

    /// True if `self` is contained in `other`.
    pub fn subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn to_record_string(&self) -> String {
        format!("[{}, {}]", rat_str(&self.lo), rat_str(&self.hi))
    }
}

/// Marker positions of the dyadic example: `m_k = 4^k`.
pub fn marker(k: u32) -> u64 {
    4u64.pow(k)
}

/// If `n = 4^k` for some `k >= 1`, returns `k`.
pub fn marker_index(n: u64) -> Option<u32> {
    if n < 4 {
        return None;
    }
    let mut m = 4u64;
    let mut k = 1u32;
    loop {
        if m == n {
            return Some(k);
        }
        if m > n / 4 {
            return None;
        }
        m *= 4;
        k += 1;
    }
}

pub fn is_marker(n: u64) -> bool {
    marker_index(n).is_some()
}

/// `p_n` of the dyadic marker example: `1/2^n` off markers, `1/2^k` at `m_k`.
pub fn example_d_p(n: u64) -> BigRational {
    match marker_index(n) {
        Some(k) => pow2_inv(k as u64),
        None => pow2_inv(n),
    }
}

/// Closed-form rule applying to every coordinate beyond the explicit prefix.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    /// Uniform on each `A_n`.
    Uniform,
    /// A fixed probability vector repeated on every tail coordinate.
    Const(Vec<BigRational>),
    /// Base 2 with `mu_n(1) = coeff * ratio^n`, `0 < ratio < 1`.
    GeometricOne { coeff: BigRational, ratio: BigRational },
}

#[derive(Debug, Clone, PartialEq)]
enum MeasureKind {
    Uniform,
    ExampleD,
    Composite { prefix: Vec<Vec<BigRational>>, tail: TailRule },
}

/// A product probability measure: one strictly positive probability vector
/// per coordinate, closed-form beyond a finite horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeq {
    base: BaseSeq,
    kind: MeasureKind,
}

/// Which coordinates a tail product runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordFilter {
    All,
    /// Skip the marker coordinates `n = 4^k`.
    OffMarkers,
}

impl CoordFilter {
    pub fn keeps(&self, n: u64) -> bool {
        match self {
            CoordFilter::All => true,
            CoordFilter::OffMarkers => !is_marker(n),
        }
    }
}

/// Upper information about a sum of complements over a coordinate tail.
#[derive(Debug, Clone, PartialEq)]
enum TailSum {
    /// The sum from `n > from` is at most this rational.
    Upper(BigRational),
    /// The sum diverges (complements bounded below by a positive constant).
    Diverges,
    Unknown,
}

/// Result of a certified tail product computation.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProduct {
    pub interval: RatInterval,
    /// False when the depth cap bound before the width tolerance was met.
    pub converged: bool,
}

impl MeasureSeq {
    pub fn uniform(base: BaseSeq) -> Self {
        MeasureSeq { base, kind: MeasureKind::Uniform }
    }

    /// The dyadic marker measure: `mu_n(1) = p_n` with markers at `4^k`.
    pub fn example_d() -> Self {
        MeasureSeq { base: BaseSeq::dyadic(), kind: MeasureKind::ExampleD }
    }

    pub fn composite(base: BaseSeq, prefix: Vec<Vec<BigRational>>, tail: TailRule) -> Self {
        for (i, v) in prefix.iter().enumerate() {
            let a = base.alpha(i + 1) as usize;
            assert_eq!(v.len(), a, "probability vector length mismatch at {}", i + 1);
            assert!(v.iter().all(|p| p.is_positive()), "digit masses must be positive");
            let sum: BigRational = v.iter().sum();
            assert!(sum.is_one(), "digit masses must sum to 1 at {}", i + 1);
        }
        if let TailRule::Const(v) = &tail {
            assert!(v.iter().all(|p| p.is_positive()));
            let sum: BigRational = v.iter().sum();
            assert!(sum.is_one(), "tail vector must sum to 1");
        }
        MeasureSeq { base, kind: MeasureKind::Composite { prefix, tail } }
    }

    pub fn base(&self) -> &BaseSeq {
        &self.base
    }

    pub fn is_example_d(&self) -> bool {
        matches!(self.kind, MeasureKind::ExampleD)
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, MeasureKind::Uniform)
    }

    /// `mu_n(d)` as an exact rational, for 1-based coordinate `n`.
    pub fn digit_mass(&self, n: u64, d: u32) -> BigRational {
        let alpha = self.base.alpha(n as usize);
        assert!(d < alpha, "digit out of range");
        match &self.kind {
            MeasureKind::Uniform => BigRational::new(BigInt::one(), BigInt::from(alpha)),
            MeasureKind::ExampleD => {
                let p = example_d_p(n);
                if d == 1 {
                    p
                } else {
                    BigRational::one() - p
                }
            }
            MeasureKind::Composite { prefix, tail } => {
                if let Some(v) = prefix.get(n as usize - 1) {
                    return v[d as usize].clone();
                }
                match tail {
                    TailRule::Uniform => BigRational::new(BigInt::one(), BigInt::from(alpha)),
                    TailRule::Const(v) => v[d as usize].clone(),
                    TailRule::GeometricOne { coeff, ratio } => {
                        let p = coeff * pow_rat(ratio, n);
                        if d == 1 {
                            p
                        } else {
                            BigRational::one() - p
                        }
                    }
                }
            }
        }
    }

    pub fn vector(&self, n: u64) -> Vec<BigRational> {
        (0..self.base.alpha(n as usize)).map(|d| self.digit_mass(n, d)).collect()
    }

    pub fn max_mass(&self, n: u64) -> BigRational {
        self.vector(n).into_iter().max().unwrap()
    }

    pub fn min_mass(&self, n: u64) -> BigRational {
        self.vector(n).into_iter().min().unwrap()
    }

    /// `lambda_n(j) = mu_n(j)/mu_n(j-1)` for `j != 0`, and
    /// `lambda_n(0) = mu_n(0)/mu_n(alpha_n - 1)`.
    pub fn lambda_ratio(&self, n: u64, j: u32) -> BigRational {
        let alpha = self.base.alpha(n as usize);
        assert!(j < alpha);
        if j == 0 {
            self.digit_mass(n, 0) / self.digit_mass(n, alpha - 1)
        } else {
            self.digit_mass(n, j) / self.digit_mass(n, j - 1)
        }
    }

    /// Exact measure of a cylinder: the finite product of digit masses along
    /// its prefix.
    pub fn mu_cylinder(&self, prefix: &Prefix) -> BigRational {
        let mut m = BigRational::one();
        for i in 1..=prefix.depth() {
            m *= self.digit_mass(i as u64, prefix.digit(i));
        }
        m
    }

    /// Upper bound for `sum over n > from (filter-kept) of 1 - mu_n(d)`.
    fn complement_tail_sum(&self, from: u64, d: u32, filter: CoordFilter) -> TailSum {
        match &self.kind {
            MeasureKind::Uniform => TailSum::Diverges,
            MeasureKind::ExampleD => {
                if d != 0 {
                    // 1 - p_n >= 1/2 on every coordinate.
                    return TailSum::Diverges;
                }
                // complements are p_n; off-marker part is bounded by the
                // geometric tail, markers add sum of 2^-k over m_k > from.
                let mut s = pow2_inv(from);
                if filter == CoordFilter::All {
                    let mut k = 1u32;
                    while marker(k) <= from {
                        k += 1;
                    }
                    // sum_{j >= k} 2^-j = 2^{-(k-1)}
                    s += pow2_inv(k as u64 - 1);
                }
                TailSum::Upper(s)
            }
            MeasureKind::Composite { prefix, tail } => {
                let horizon = prefix.len() as u64;
                let mut s = BigRational::zero();
                for n in (from + 1)..=horizon {
                    if filter.keeps(n) {
                        s += BigRational::one() - self.digit_mass(n, d);
                    }
                }
                let tail_from = from.max(horizon);
                match tail {
                    TailRule::Uniform | TailRule::Const(_) => {
                        // constant positive complement on an infinite tail
                        TailSum::Diverges
                    }
                    TailRule::GeometricOne { coeff, ratio } => {
                        if d == 0 {
                            // complements coeff * ratio^n, n > tail_from; the
                            // filter can only drop terms.
                            let first = coeff * pow_rat(ratio, tail_from + 1);
                            let geo = first / (BigRational::one() - ratio);
                            TailSum::Upper(s + geo)
                        } else {
                            TailSum::Diverges
                        }
                    }
                }
            }
        }
    }

    /// Certified enclosure of the infinite product of `mu_n(d)` over the
    /// filtered coordinates `n >= from`. The enclosure is refined until its
    /// width is at most `tol` or the depth cap binds.
    pub fn tail_product_bounds(
        &self,
        from: u64,
        filter: CoordFilter,
        d: u32,
        tol: &BigRational,
        depth_cap: u64,
    ) -> Result<TailProduct> {
        let mut partial = BigRational::one();
        let mut n = from;
        loop {
            let enclosure = match self.complement_tail_sum(n, d, filter) {
                TailSum::Upper(s) => {
                    let lo = &partial * (BigRational::one() - s);
                    RatInterval::new(lo.min(partial.clone()), partial.clone()).clamp_lo_zero()
                }
                TailSum::Diverges => {
                    RatInterval::new(BigRational::zero(), partial.clone())
                }
                TailSum::Unknown => return Err(Error::NoTailCertificate),
            };
            if enclosure.width() <= *tol {
                return Ok(TailProduct { interval: enclosure, converged: true });
            }
            if n >= from + depth_cap {
                return Ok(TailProduct { interval: enclosure, converged: false });
            }
            n += 1;
            if filter.keeps(n) {
                partial *= self.digit_mass(n, d);
            }
        }
    }
}

fn pow_rat(r: &BigRational, e: u64) -> BigRational {
    let n = num::pow::pow(r.numer().clone(), e as usize);
    let d = num::pow::pow(r.denom().clone(), e as usize);
    BigRational::new(n, d)
}

/// One term of the continuity display: `lambda_n(j) * prod_{k<n} lambda_k(0)`.
/// The product index runs from 1 (the display's `lambda_0(0)` is undefined and
/// is read as an empty factor).
pub fn star_term(ms: &MeasureSeq, n: u64, j: u32, prefix_prod: &BigRational) -> BigRational {
    ms.lambda_ratio(n, j) * prefix_prod
}

/// Check the continuity condition: the infimum over `n, j` of
/// `lambda_n(j) * prod_{k=1}^{n-1} lambda_k(0)` is strictly positive.
///
/// The finite part is an exact minimum over `n <= horizon`; the tail is
/// handled by a closed-form certificate when the rule admits one.
pub fn condition_star(ms: &MeasureSeq, horizon: u64) -> ClaimReport {
    assert!(horizon >= 1);
    let mut prefix_prod = BigRational::one();
    let mut min_term: Option<BigRational> = None;
    let mut arg = (0u64, 0u32);
    for n in 1..=horizon {
        for j in 0..ms.base().alpha(n as usize) {
            let t = star_term(ms, n, j, &prefix_prod);
            if min_term.as_ref().map_or(true, |m| &t < m) {
                min_term = Some(t);
                arg = (n, j);
            }
        }
        prefix_prod *= ms.lambda_ratio(n, 0);
    }
    let min_term = min_term.unwrap();
    // prefix_prod is now P_H = prod_{k<=H} lambda_k(0)
    let tail = star_tail_bound(ms, horizon, &prefix_prod);
    let base = ClaimReport::new("star", Verdict::Inconclusive)
        .param("horizon", horizon)
        .value_rat("min_term", &min_term)
        .value_str("argmin", format!("n={}, j={}", arg.0, arg.1));
    match tail {
        StarTail::LowerBound(tb) => {
            let inf_lb = min_term.clone().min(tb.clone());
            let mut rep = base;
            rep.verdict = Verdict::Verified;
            rep.value_rat("tail_lower_bound", &tb)
                .value_rat("inf_lower_bound", &inf_lb)
                .note("tail terms certified above the bound by the closed-form rule")
        }
        StarTail::TendsToZero => {
            let mut rep = base;
            rep.verdict = Verdict::Refuted;
            rep.note("tail terms tend to zero: the infimum is 0")
        }
        StarTail::NoCertificate => base.note("no tail certificate at this horizon"),
    }
}

enum StarTail {
    /// Every term with `n > horizon` is at least this positive rational.
    LowerBound(BigRational),
    TendsToZero,
    NoCertificate,
}

fn star_tail_bound(ms: &MeasureSeq, horizon: u64, p_h: &BigRational) -> StarTail {
    match &ms.kind {
        MeasureKind::Uniform => StarTail::LowerBound(BigRational::one()),
        MeasureKind::ExampleD => {
            // For n > H >= 16: lambda_n(0) >= 1 >= lambda_n(1), so the level
            // minimum is P_{n-1} * lambda_n(1). With p_n = 2^{-i(n)} (i(n)=n
            // off markers, k at 4^k), lambda_k(0) >= 2^{i(k)-1} and
            // lambda_n(1) >= 2^{-i(n)} >= 2^{-n}. The resulting exponent
            // gains at least i(n)-2 >= 1 per step past 16, so every tail
            // term is at least P_H * 2^{-(H+1)}.
            if horizon < 16 {
                return StarTail::NoCertificate;
            }
            StarTail::LowerBound(p_h * pow2_inv(horizon + 1))
        }
        MeasureKind::Composite { prefix, tail } => {
            if horizon < prefix.len() as u64 {
                return StarTail::NoCertificate;
            }
            match tail {
                TailRule::Uniform => {
                    // all tail lambdas are 1: every tail term equals P_H
                    StarTail::LowerBound(p_h.clone())
                }
                TailRule::Const(v) => {
                    let alpha = v.len() as u32;
                    let lam0 = &v[0] / &v[(alpha - 1) as usize];
                    if lam0 < BigRational::one() {
                        return StarTail::TendsToZero;
                    }
                    let mut min_l = lam0;
                    for j in 1..alpha {
                        let l = &v[j as usize] / &v[(j - 1) as usize];
                        min_l = min_l.min(l);
                    }
                    // P is nondecreasing past the horizon, so every tail
                    // term is at least P_H * min_j lambda(j).
                    StarTail::LowerBound(p_h * min_l)
                }
                TailRule::GeometricOne { .. } => StarTail::NoCertificate,
            }
        }
    }
}

/// Certify whether `prod_n max_a mu_n(a) = 0` (non-atomicity of the product
/// measure). Divergence of the complement sum proves the product is zero; a
/// convergent complement tail yields a certified positive lower bound and
/// the verdict "refuted" (the measure has atoms).
pub fn nonatomic_check(ms: &MeasureSeq, horizon: u64) -> ClaimReport {
    assert!(horizon >= 1);
    let mut partial = BigRational::one();
    for n in 1..=horizon {
        partial *= ms.max_mass(n);
    }
    let rep = ClaimReport::new("nonatomic", Verdict::Inconclusive).param("horizon", horizon);
    match max_complement_tail(ms, horizon) {
        TailSum::Diverges => {
            let mut rep = rep;
            rep.verdict = Verdict::Verified;
            rep.value_rat("partial_product_upper", &partial)
                .note("complement sum diverges on the tail rule: the product of maxima is 0")
        }
        TailSum::Upper(s) => {
            if s < BigRational::one() {
                let lo = &partial * (BigRational::one() - &s);
                let mut rep = rep;
                rep.verdict = Verdict::Refuted;
                rep.value_interval("product_of_maxima", &RatInterval::new(lo, partial))
                    .note("not non-atomic: the product of maxima has a certified positive lower bound")
            } else {
                rep.value_rat("partial_product_upper", &partial)
                    .note("complement tail sum bound not below 1 at this horizon")
            }
        }
        TailSum::Unknown => rep.note("no closed-form complement certificate for this rule"),
    }
}

fn max_complement_tail(ms: &MeasureSeq, from: u64) -> TailSum {
    match &ms.kind {
        MeasureKind::Uniform => TailSum::Diverges,
        // max_a mu_n(a) = 1 - p_n since p_n <= 1/2, so the complement is
        // p_n = 1 - mu_n(0).
        MeasureKind::ExampleD => ms.complement_tail_sum(from, 0, CoordFilter::All),
        MeasureKind::Composite { prefix, tail } => {
            let mut s = BigRational::zero();
            for n in (from + 1)..=(prefix.len() as u64) {
                s += BigRational::one() - ms.max_mass(n);
            }
            let tail_from = from.max(prefix.len() as u64);
            match tail {
                TailRule::Uniform | TailRule::Const(_) => TailSum::Diverges,
                TailRule::GeometricOne { coeff, ratio } => {
                    // requires p_n <= 1/2 on the whole tail so that the max
                    // is mu_n(0); true once coeff*ratio^n <= 1/2.
                    let p_first = coeff * pow_rat(ratio, tail_from + 1);
                    if p_first > rat(1, 2) {
                        return TailSum::Unknown;
                    }
                    let geo = &p_first / (BigRational::one() - ratio);
                    TailSum::Upper(s + geo)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixed_radix::BaseSeq;
    use num::BigUint;
    use num_traits::ToPrimitive;

    #[test]
    fn marker_positions() {
        assert_eq!(marker(1), 4);
        assert_eq!(marker(2), 16);
        assert_eq!(marker(3), 64);
        assert_eq!(marker_index(16), Some(2));
        assert_eq!(marker_index(8), None);
        assert_eq!(marker_index(1), None);
        assert!(is_marker(4u64.pow(9)));
    }

    #[test]
    fn example_d_digit_masses() {
        let ms = MeasureSeq::example_d();
        assert_eq!(ms.digit_mass(1, 1), rat(1, 2));
        assert_eq!(ms.digit_mass(2, 1), rat(1, 4));
        assert_eq!(ms.digit_mass(4, 1), rat(1, 2)); // m_1 = 4
        assert_eq!(ms.digit_mass(16, 1), rat(1, 4)); // m_2 = 16
        assert_eq!(ms.digit_mass(5, 0), rat(31, 32));
    }

    #[test]
    fn lambda_ratio_examples() {
        let ms = MeasureSeq::example_d();
        assert_eq!(ms.lambda_ratio(1, 0), rat(1, 1));
        assert_eq!(ms.lambda_ratio(2, 1), rat(1, 3));
        let uni = MeasureSeq::uniform(BaseSeq::with_prefix(vec![3, 5], 2));
        for n in 1..=4u64 {
            for j in 0..uni.base().alpha(n as usize) {
                assert_eq!(uni.lambda_ratio(n, j), BigRational::one());
            }
        }
    }

    #[test]
    fn mu_cylinder_examples() {
        let ms = MeasureSeq::example_d();
        let base = BaseSeq::dyadic();
        let c = Prefix::from_digits(vec![0, 1], &base);
        assert_eq!(ms.mu_cylinder(&c), rat(1, 8));
        assert_eq!(ms.mu_cylinder(&Prefix::from_digits(vec![], &base)), rat(1, 1));
        let c = Prefix::from_digits(vec![1, 1, 1, 1], &base);
        assert_eq!(ms.mu_cylinder(&c), rat(1, 128));
    }

    #[test]
    fn cylinder_additivity_exhaustive() {
        for ms in [
            MeasureSeq::example_d(),
            MeasureSeq::uniform(BaseSeq::with_prefix(vec![3, 2, 4], 2)),
        ] {
            for depth in [1usize, 4, 8, 12] {
                let beta = ms.base().beta(depth).to_u64().unwrap();
                if beta > 1 << 13 {
                    continue;
                }
                let mut total = BigRational::zero();
                for v in 0..beta {
                    let p = Prefix::from_value(&BigUint::from(v), depth, ms.base());
                    total += ms.mu_cylinder(&p);
                }
                assert!(total.is_one(), "depth {depth}");
            }
        }
    }

    #[test]
    fn condition_star_uniform_is_one() {
        let ms = MeasureSeq::uniform(BaseSeq::dyadic());
        let rep = condition_star(&ms, 8);
        assert_eq!(rep.verdict, Verdict::Verified);
        assert_eq!(rep.values["min_term"], "1/1");
        assert_eq!(rep.values["inf_lower_bound"], "1/1");
    }

    #[test]
    fn condition_star_example_d() {
        let ms = MeasureSeq::example_d();
        let rep = condition_star(&ms, 64);
        assert_eq!(rep.verdict, Verdict::Verified);
        // the exact minimum over n <= 64 is 1/3, attained at n=2, j=1
        assert_eq!(rep.values["min_term"], "1/3");
        assert_eq!(rep.values["inf_lower_bound"], "1/3");
        assert!(rep.values["argmin"].contains("n=2"));
    }

    #[test]
    fn condition_star_decaying_const_tail_refuted() {
        // tail vector (1/4, 3/4): lambda(0) = 1/3 < 1, terms tend to zero
        let ms = MeasureSeq::composite(
            BaseSeq::dyadic(),
            vec![],
            TailRule::Const(vec![rat(1, 4), rat(3, 4)]),
        );
        let rep = condition_star(&ms, 8);
        assert_eq!(rep.verdict, Verdict::Refuted);
    }

    #[test]
    fn condition_star_stress_fixture_reports_minimum() {
        // mu_n(1) = 2^{-2^n} on an explicit prefix, uniform beyond
        let prefix: Vec<Vec<BigRational>> = (1..=10u64)
            .map(|n| {
                let p = pow2_inv(1u64 << n);
                vec![BigRational::one() - &p, p]
            })
            .collect();
        let ms = MeasureSeq::composite(BaseSeq::dyadic(), prefix, TailRule::Uniform);
        let rep = condition_star(&ms, 12);
        assert_eq!(rep.verdict, Verdict::Verified);
        assert!(rep.values.contains_key("min_term"));
    }

    #[test]
    fn nonatomic_uniform_dyadic() {
        let ms = MeasureSeq::uniform(BaseSeq::dyadic());
        let rep = nonatomic_check(&ms, 16);
        assert_eq!(rep.verdict, Verdict::Verified);
        assert_eq!(rep.values["partial_product_upper"], "1/65536");
    }

    #[test]
    fn nonatomic_example_d_has_atoms() {
        // sum p_n converges, so the product of maxima is strictly positive
        let ms = MeasureSeq::example_d();
        let rep = nonatomic_check(&ms, 20);
        assert_eq!(rep.verdict, Verdict::Refuted);
    }

    #[test]
    fn nonatomic_geometric_weierstrass() {
        // mu_n(0) = 1 - 4^{-n}: product strictly positive, Weierstrass bound
        let ms = MeasureSeq::composite(
            BaseSeq::dyadic(),
            vec![],
            TailRule::GeometricOne { coeff: BigRational::one(), ratio: rat(1, 4) },
        );
        let rep = nonatomic_check(&ms, 8);
        assert_eq!(rep.verdict, Verdict::Refuted);
    }

    #[test]
    fn tail_product_weierstrass_example() {
        // prod_{n>=3} (1 - 2^{-n}) lies in [3/4, 7/8]
        let ms = MeasureSeq::composite(
            BaseSeq::dyadic(),
            vec![],
            TailRule::GeometricOne { coeff: BigRational::one(), ratio: rat(1, 2) },
        );
        let tp = ms
            .tail_product_bounds(2, CoordFilter::All, 0, &crate::default_tol(), 256)
            .unwrap();
        assert!(tp.converged);
        let outer = RatInterval::new(rat(3, 4), rat(7, 8));
        assert!(tp.interval.subset_of(&outer), "{:?}", tp.interval);
    }

    #[test]
    fn tail_product_nested_refinement() {
        let ms = MeasureSeq::example_d();
        let wide = ms.tail_product_bounds(16, CoordFilter::OffMarkers, 0, &rat(1, 100), 4096).unwrap();
        let tight = ms
            .tail_product_bounds(16, CoordFilter::OffMarkers, 0, &crate::default_tol(), 4096)
            .unwrap();
        assert!(tight.interval.subset_of(&wide.interval));
        // B_2-style tail from 17: lower bound at least 1 - 2^{-16}
        let tp = ms.tail_product_bounds(16, CoordFilter::OffMarkers, 0, &crate::default_tol(), 4096).unwrap();
        assert!(tp.interval.lo >= BigRational::one() - pow2_inv(16));
    }

    #[test]
    fn first_return_ratio_law() {
        // mu(f^{-1}(C)) * lambda_r(j) * prod_{k<r} lambda_k(0) = mu(C)
        let ms = MeasureSeq::example_d();
        let base = BaseSeq::dyadic();
        let depth = 8usize;
        let beta = base.beta(depth).to_u64().unwrap();
        for v in 0..beta {
            let c = Prefix::from_value(&BigUint::from(v), depth, &base);
            let pre_v = if v == 0 { beta - 1 } else { v - 1 };
            let pre = Prefix::from_value(&BigUint::from(pre_v), depth, &base);
            let mu_c = ms.mu_cylinder(&c);
            let mu_pre = ms.mu_cylinder(&pre);
            if v == 0 {
                let mut prod = BigRational::one();
                for k in 1..=depth as u64 {
                    prod *= ms.lambda_ratio(k, 0);
                }
                assert_eq!(mu_pre, &mu_c / prod);
            } else {
                let r = (1..=depth).find(|&i| c.digit(i) != 0).unwrap() as u64;
                let j = c.digit(r as usize);
                let mut factor = ms.lambda_ratio(r, j);
                for k in 1..r {
                    factor *= ms.lambda_ratio(k, 0);
                }
                assert_eq!(&mu_pre * &factor, mu_c, "v={v}");
            }
        }
    }
}
