//! The measurable-set calculus: cylinders, finite cylinder unions, pattern
//! sets with per-coordinate digit constraints, and the carry-transfer
//! dynamic program computing certified measures of images and preimages
//! under powers of the odometer.

use crate::measure::{CoordFilter, MeasureSeq, RatInterval, TailProduct};
use crate::mixed_radix::{prefix_translate, BaseSeq, DigitTail, MixedRadixDigits, Prefix};
use crate::{Error, Result};
use num::{BigInt, BigRational, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// Direction of a set translation under the odometer group action.
///
/// `f^{-n}(S) = {x : x + n in S}` (preimage) and `f^{n}(S) = S + n =
/// {x : x + (-n) in S}` (image); both reduce to translation by a digit
/// sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Preimage,
    Image,
}

/// The set of points with a prescribed depth-`D` prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    prefix: Prefix,
}

impl Cylinder {
    pub fn new(prefix: Prefix) -> Self {
        Cylinder { prefix }
    }

    pub fn from_value(v: u64, depth: usize, base: &BaseSeq) -> Self {
        Cylinder { prefix: Prefix::from_value(&BigUint::from(v), depth, base) }
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn depth(&self) -> usize {
        self.prefix.depth()
    }

    pub fn measure(&self, ms: &MeasureSeq) -> BigRational {
        ms.mu_cylinder(&self.prefix)
    }

    /// The exact image or preimage cylinder: the tail odometer is a
    /// bijection, so translating a cylinder yields a cylinder of the same
    /// depth with prefix value `(v -+ n) mod beta_D`.
    pub fn translate(&self, n: &BigInt, direction: Direction) -> Cylinder {
        let shift = match direction {
            Direction::Preimage => -n.clone(),
            Direction::Image => n.clone(),
        };
        let (v, _) = prefix_translate(self.prefix.value(), &shift, self.depth(), self.prefix.base());
        Cylinder { prefix: Prefix::from_value(&v, self.depth(), self.prefix.base()) }
    }
}

/// A finite union of same-depth cylinders in canonical sorted disjoint form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderUnion {
    base: BaseSeq,
    depth: usize,
    values: BTreeSet<BigUint>,
}

impl CylinderUnion {
    pub fn empty(depth: usize, base: &BaseSeq) -> Self {
        CylinderUnion { base: base.clone(), depth, values: BTreeSet::new() }
    }

    pub fn full(depth: usize, base: &BaseSeq) -> Self {
        let beta = base.beta(depth).to_u64().expect("full union only at small depth");
        let values = (0..beta).map(BigUint::from).collect();
        CylinderUnion { base: base.clone(), depth, values }
    }

    pub fn from_cylinder(c: &Cylinder) -> Self {
        let mut values = BTreeSet::new();
        values.insert(c.prefix().value().clone());
        CylinderUnion { base: c.prefix().base().clone(), depth: c.depth(), values }
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(vals: I, depth: usize, base: &BaseSeq) -> Self {
        let beta = base.beta(depth);
        let values: BTreeSet<BigUint> = vals.into_iter().map(BigUint::from).collect();
        assert!(values.iter().all(|v| v < &beta));
        CylinderUnion { base: base.clone(), depth, values }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &BigUint> {
        self.values.iter()
    }

    pub fn contains_value(&self, v: &BigUint) -> bool {
        self.values.contains(v)
    }

    /// Rewrite at a finer depth; the set of points is unchanged.
    pub fn refine_to(&self, depth: usize) -> Self {
        assert!(depth >= self.depth);
        if depth == self.depth {
            return self.clone();
        }
        let beta_d = self.base.beta(self.depth);
        let factor = (self.base.beta(depth) / &beta_d).to_u64().expect("refinement factor fits");
        let mut values = BTreeSet::new();
        for v in &self.values {
            for j in 0..factor {
                values.insert(v + &beta_d * BigUint::from(j));
            }
        }
        CylinderUnion { base: self.base.clone(), depth, values }
    }

    fn check_depth(&self, other: &Self) -> Result<()> {
        if self.depth != other.depth {
            return Err(Error::DepthMismatch(self.depth, other.depth));
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_depth(other)?;
        let values = self.values.union(&other.values).cloned().collect();
        Ok(CylinderUnion { base: self.base.clone(), depth: self.depth, values })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_depth(other)?;
        let values = self.values.intersection(&other.values).cloned().collect();
        Ok(CylinderUnion { base: self.base.clone(), depth: self.depth, values })
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_depth(other)?;
        let values = self.values.difference(&other.values).cloned().collect();
        Ok(CylinderUnion { base: self.base.clone(), depth: self.depth, values })
    }

    pub fn complement(&self) -> Self {
        let beta = self.base.beta(self.depth).to_u64().expect("complement only at small depth");
        let values = (0..beta).map(BigUint::from).filter(|v| !self.values.contains(v)).collect();
        CylinderUnion { base: self.base.clone(), depth: self.depth, values }
    }

    pub fn measure(&self, ms: &MeasureSeq) -> BigRational {
        self.values
            .iter()
            .map(|v| ms.mu_cylinder(&Prefix::from_value(v, self.depth, &self.base)))
            .sum()
    }

    /// Translate every member cylinder; the union maps onto a union of the
    /// same cardinality.
    pub fn translate(&self, n: &BigInt, direction: Direction) -> Self {
        let shift = match direction {
            Direction::Preimage => -n.clone(),
            Direction::Image => n.clone(),
        };
        let values = self
            .values
            .iter()
            .map(|v| prefix_translate(v, &shift, self.depth, &self.base).0)
            .collect();
        CylinderUnion { base: self.base.clone(), depth: self.depth, values }
    }
}

/// Closed-form rule for pattern coordinates beyond the explicit constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventualRule {
    /// No constraint beyond the explicit window.
    Free,
    /// For `i >= from`: digit 0 required off markers, markers free.
    ZeroOffMarkers { from: u64 },
}

/// A measurable set given by per-coordinate allowed-digit constraints:
/// finitely many exceptional positions plus a closed-form eventual rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    base: BaseSeq,
    allowed: BTreeMap<u64, BTreeSet<u32>>,
    tail: EventualRule,
}

impl PatternSet {
    pub fn new(base: &BaseSeq, allowed: BTreeMap<u64, BTreeSet<u32>>, tail: EventualRule) -> Self {
        for (&i, set) in &allowed {
            assert!(i >= 1, "positions are 1-based");
            assert!(!set.is_empty(), "allowed sets must be nonempty");
            assert!(set.iter().all(|&d| d < base.alpha(i as usize)), "digit out of range");
        }
        let mut s = PatternSet { base: base.clone(), allowed, tail };
        s.canonicalize();
        s
    }

    pub fn full(base: &BaseSeq) -> Self {
        PatternSet { base: base.clone(), allowed: BTreeMap::new(), tail: EventualRule::Free }
    }

    pub fn from_cylinder(c: &Cylinder) -> Self {
        let mut allowed = BTreeMap::new();
        for i in 1..=c.depth() {
            allowed.insert(i as u64, BTreeSet::from([c.prefix().digit(i)]));
        }
        PatternSet::new(c.prefix().base(), allowed, EventualRule::Free)
    }

    /// Drop explicit entries that repeat what the eventual rule or freeness
    /// already says; equality is decided on this canonical form.
    fn canonicalize(&mut self) {
        let base = self.base.clone();
        let tail = self.tail;
        self.allowed.retain(|&i, set| {
            let full = set.len() as u32 == base.alpha(i as usize);
            match tail {
                EventualRule::Free => !full,
                EventualRule::ZeroOffMarkers { from } => {
                    if i < from {
                        !full
                    } else if crate::measure::is_marker(i) {
                        !full
                    } else {
                        !(set.len() == 1 && set.contains(&0))
                    }
                }
            }
        });
    }

    pub fn base(&self) -> &BaseSeq {
        &self.base
    }

    pub fn tail(&self) -> EventualRule {
        self.tail
    }

    pub fn explicit(&self) -> &BTreeMap<u64, BTreeSet<u32>> {
        &self.allowed
    }

    pub fn is_allowed(&self, i: u64, d: u32) -> bool {
        if let Some(set) = self.allowed.get(&i) {
            return set.contains(&d);
        }
        match self.tail {
            EventualRule::Free => true,
            EventualRule::ZeroOffMarkers { from } => {
                i < from || crate::measure::is_marker(i) || d == 0
            }
        }
    }

    /// Total digit mass allowed at coordinate `i`.
    pub fn allowed_mass(&self, ms: &MeasureSeq, i: u64) -> BigRational {
        (0..self.base.alpha(i as usize))
            .filter(|&d| self.is_allowed(i, d))
            .map(|d| ms.digit_mass(i, d))
            .sum()
    }

    /// Last coordinate at which something other than the tail rule applies.
    pub fn explicit_horizon(&self) -> u64 {
        self.allowed.keys().next_back().copied().unwrap_or(0)
    }

    /// Certified enclosure of the pattern's product measure.
    pub fn measure(&self, ms: &MeasureSeq, tol: &BigRational, depth_cap: u64) -> Result<TailProduct> {
        let h0 = match self.tail {
            EventualRule::Free => self.explicit_horizon(),
            EventualRule::ZeroOffMarkers { from } => self.explicit_horizon().max(from - 1),
        };
        let mut p = BigRational::one();
        for i in 1..=h0 {
            p *= self.allowed_mass(ms, i);
        }
        match self.tail {
            EventualRule::Free => {
                Ok(TailProduct { interval: RatInterval::point(p), converged: true })
            }
            EventualRule::ZeroOffMarkers { .. } => {
                let tp = ms.tail_product_bounds(h0, CoordFilter::OffMarkers, 0, tol, depth_cap)?;
                Ok(TailProduct {
                    interval: tp.interval.scale(&p),
                    converged: tp.converged,
                })
            }
        }
    }

    /// Certified enclosure of `mu({x : x + t in S})` where `t` is the digit
    /// sequence of `n` (preimage) or `-n` (image), computed by the
    /// carry-transfer dynamic program.
    ///
    /// The DP sweeps coordinates, splitting accumulated mass by carry value.
    /// Beyond every explicit window a persistent carry acts as the identity
    /// on the remaining coordinates (carry 0 for finite-support `t`, carry 1
    /// for cofinite-maximal `t`); the identity mass is resolved against the
    /// tail constraint measure and the opposite carry mass is enclosed in
    /// `[0, mass]` until it drains or the depth cap binds.
    pub fn translate_measure(
        &self,
        ms: &MeasureSeq,
        n: &BigUint,
        direction: Direction,
        tol: &BigRational,
        depth_cap: u64,
    ) -> Result<TailProduct> {
        if n.is_zero() {
            return Err(Error::InvalidParameter("translation amount must be >= 1".into()));
        }
        let t = match direction {
            Direction::Preimage => MixedRadixDigits::to_digits(n, &self.base),
            Direction::Image => MixedRadixDigits::neg_digits(n, &self.base)?,
        };
        let window = t.window_len() as u64;
        let horizon = match self.tail {
            EventualRule::Free => self.explicit_horizon(),
            EventualRule::ZeroOffMarkers { from } => self.explicit_horizon().max(from.saturating_sub(1)),
        };
        let settled = window.max(horizon);

        let mut mass = [BigRational::one(), BigRational::zero()];
        let mut i = 0u64;
        loop {
            // Past every window: for a Free tail everything is accepted
            // regardless of carry, and the value is exact.
            if i >= settled && self.tail == EventualRule::Free {
                let total = &mass[0] + &mass[1];
                return Ok(TailProduct { interval: RatInterval::point(total), converged: true });
            }
            if i >= settled {
                let identity_carry = match t.tail() {
                    DigitTail::Zeros => 0usize,
                    DigitTail::Max => 1usize,
                };
                let resolved = &mass[identity_carry];
                let unresolved = &mass[1 - identity_carry];
                let should_check = unresolved <= tol || i >= depth_cap || (i - settled) % 16 == 0;
                if should_check {
                    let tp = ms.tail_product_bounds(i, CoordFilter::OffMarkers, 0, tol, depth_cap)?;
                    let lo = resolved * &tp.interval.lo;
                    let hi = resolved * &tp.interval.hi + unresolved;
                    let enclosure = RatInterval::new(lo.clone().min(hi.clone()), hi);
                    if enclosure.width() <= *tol {
                        return Ok(TailProduct { interval: enclosure, converged: true });
                    }
                    if i >= depth_cap {
                        return Ok(TailProduct { interval: enclosure, converged: false });
                    }
                }
            }
            // one DP step at coordinate i+1
            i += 1;
            let alpha = self.base.alpha(i as usize);
            let ti = t.digit(i as usize);
            let mut next = [BigRational::zero(), BigRational::zero()];
            for (c, m) in mass.iter().enumerate() {
                if m.is_zero() {
                    continue;
                }
                for x in 0..alpha {
                    let s = x + ti + c as u32;
                    let digit = s % alpha;
                    let carry = (s / alpha) as usize;
                    if self.is_allowed(i, digit) {
                        next[carry] += m * ms.digit_mass(i, x);
                    }
                }
            }
            mass = next;
        }
    }
}
