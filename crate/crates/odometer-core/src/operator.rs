//! The composition operator on simple functions: exact `T_f^n` action,
//! `L^p` orbit norms, periodic points, conservativity witnesses, the
//! supercyclicity-gap set checker, and the constructive hypercyclicity
//! witness procedure.
//!
//! Only simple functions (finite rational combinations of disjoint
//! same-depth cylinder indicators) are first-class; every computation here
//! happens on them.

use crate::measure::{MeasureSeq, RatInterval};
use crate::mixed_radix::{prefix_translate, BaseSeq, Prefix};
use crate::pattern::{Cylinder, CylinderUnion, Direction, EventualRule, PatternSet};
use crate::report::{rat_str, ClaimReport, Verdict};
use crate::{Error, Result};
use num::{BigInt, BigRational, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// A finite rational combination of disjoint same-depth cylinder
/// indicators, keyed by cylinder prefix value. Zero coefficients are
/// pruned; uncovered cylinders carry the value 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    base: BaseSeq,
    depth: usize,
    terms: BTreeMap<BigUint, BigRational>,
}

impl SimpleFunction {
    pub fn new<I>(depth: usize, base: &BaseSeq, terms: I) -> Self
    where
        I: IntoIterator<Item = (BigUint, BigRational)>,
    {
        let beta = base.beta(depth);
        let mut map = BTreeMap::new();
        for (v, c) in terms {
            assert!(v < beta, "cylinder value exceeds beta_D - 1");
            if !c.is_zero() {
                let entry = map.entry(v).or_insert_with(BigRational::zero);
                *entry += c;
            }
        }
        map.retain(|_, c| !c.is_zero());
        SimpleFunction { base: base.clone(), depth, terms: map }
    }

    /// The constant function, as a depth-0 simple function.
    pub fn constant(c: BigRational, base: &BaseSeq) -> Self {
        Self::new(0, base, [(BigUint::zero(), c)])
    }

    pub fn indicator(c: &Cylinder) -> Self {
        Self::new(
            c.depth(),
            c.prefix().base(),
            [(c.prefix().value().clone(), BigRational::one())],
        )
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn base(&self) -> &BaseSeq {
        &self.base
    }

    pub fn terms(&self) -> &BTreeMap<BigUint, BigRational> {
        &self.terms
    }

    pub fn value_at(&self, v: &BigUint) -> BigRational {
        self.terms.get(v).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero_function(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rewrite at a finer depth without changing the function.
    pub fn refine_to(&self, depth: usize) -> Self {
        assert!(depth >= self.depth);
        if depth == self.depth {
            return self.clone();
        }
        let beta_d = self.base.beta(self.depth);
        let factor = (self.base.beta(depth) / &beta_d).to_u64().expect("refinement factor");
        let mut terms = BTreeMap::new();
        for (v, c) in &self.terms {
            for j in 0..factor {
                terms.insert(v + &beta_d * BigUint::from(j), c.clone());
            }
        }
        SimpleFunction { base: self.base.clone(), depth, terms }
    }

    pub fn scale(&self, a: &BigRational) -> Self {
        Self::new(
            self.depth,
            &self.base,
            self.terms.iter().map(|(v, c)| (v.clone(), a * c)),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let depth = self.depth.max(other.depth);
        let a = self.refine_to(depth);
        let b = other.refine_to(depth);
        let mut terms = a.terms;
        for (v, c) in b.terms {
            let entry = terms.entry(v).or_insert_with(BigRational::zero);
            *entry += c;
        }
        Self::new(depth, &self.base, terms)
    }

    /// `T_f^n(phi) = phi o f^n`: every indicator `chi_C` maps to the
    /// indicator of `f^{-n}(C)`, coefficients unchanged.
    pub fn apply_t(&self, n: &BigUint) -> Self {
        let shift = -BigInt::from(n.clone());
        let terms = self
            .terms
            .iter()
            .map(|(v, c)| (prefix_translate(v, &shift, self.depth, &self.base).0, c.clone()))
            .collect::<Vec<_>>();
        Self::new(self.depth, &self.base, terms)
    }

    pub fn apply_t_u64(&self, n: u64) -> Self {
        self.apply_t(&BigUint::from(n))
    }

    /// Exact `||phi||_p^p` for integer `p >= 1`.
    pub fn lp_norm_pp(&self, ms: &MeasureSeq, p: u32) -> BigRational {
        self.affine_norm_pp(ms, &BigRational::one(), &BigRational::zero(), p)
    }

    /// Exact `||a*phi + b||_p^p` for integer `p >= 1`, without materializing
    /// the uncovered cylinders: they all carry the value `b`.
    pub fn affine_norm_pp(&self, ms: &MeasureSeq, a: &BigRational, b: &BigRational, p: u32) -> BigRational {
        assert!(p >= 1);
        let mut total = BigRational::zero();
        let mut covered = BigRational::zero();
        for (v, c) in &self.terms {
            let mu = ms.mu_cylinder(&Prefix::from_value(v, self.depth, &self.base));
            let val = a * c + b;
            total += pow_abs(&val, p) * &mu;
            covered += mu;
        }
        total += pow_abs(b, p) * (BigRational::one() - covered);
        total
    }

    /// The exact level set `{x : |a*phi(x) + b| < 1}` as a cylinder union.
    /// Boundary points with `|a*phi + b| = 1` go to the closed (excluded)
    /// side.
    pub fn strict_unit_level_set(&self, a: &BigRational, b: &BigRational) -> CylinderUnion {
        let beta = self.base.beta(self.depth).to_u64().expect("level sets only at small depth");
        let mut values = Vec::new();
        for v in 0..beta {
            let bv = BigUint::from(v);
            let val = a * self.value_at(&bv) + b;
            if pow_abs(&val, 1) < BigRational::one() {
                values.push(v);
            }
        }
        CylinderUnion::from_values(values, self.depth, &self.base)
    }
}

fn pow_abs(r: &BigRational, p: u32) -> BigRational {
    let a = r.abs();
    num::pow::pow(a, p as usize)
}

/// The exact orbit of `||T^n phi||_p^p` for `1 <= n <= len`, with a summary.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitScan {
    pub norms: Vec<BigRational>,
    pub min: BigRational,
    pub argmin: u64,
    pub max: BigRational,
    pub argmax: u64,
    /// Count of entries at or below the threshold, when one was given.
    pub below_threshold: Option<u64>,
}

/// Exact `||T^n phi||_p^p` for `n = 1..=len`. An exploratory scanner: it
/// reports evidence (minima, maxima, threshold crossings) and proves
/// nothing about limits.
pub fn orbit_norms(
    ms: &MeasureSeq,
    phi: &SimpleFunction,
    p: u32,
    len: u64,
    threshold: Option<&BigRational>,
) -> OrbitScan {
    assert!(len >= 1);
    let mut norms = Vec::with_capacity(len as usize);
    let mut cur = phi.clone();
    for _ in 0..len {
        cur = cur.apply_t(&BigUint::one());
        norms.push(cur.lp_norm_pp(ms, p));
    }
    let (mut min, mut argmin) = (norms[0].clone(), 1u64);
    let (mut max, mut argmax) = (norms[0].clone(), 1u64);
    for (i, v) in norms.iter().enumerate() {
        if v < &min {
            min = v.clone();
            argmin = i as u64 + 1;
        }
        if v > &max {
            max = v.clone();
            argmax = i as u64 + 1;
        }
    }
    let below_threshold = threshold.map(|t| norms.iter().filter(|v| *v <= t).count() as u64);
    OrbitScan { norms, min, argmin, max, argmax, below_threshold }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodReport {
    /// `beta_D`, always a period of a depth-D simple function.
    pub beta_period: BigUint,
    /// Exact check that `T^{beta_D} phi = phi` held.
    pub beta_verified: bool,
    /// The minimal period, found by exact search over divisors of `beta_D`.
    pub minimal: BigUint,
}

/// Every depth-`D` simple function is periodic with period `beta_D`;
/// verify that exactly and find the minimal period.
pub fn periodic_period(phi: &SimpleFunction) -> PeriodReport {
    let beta = phi.base().beta(phi.depth());
    let beta_verified = phi.apply_t(&beta) == *phi;
    let beta_u = beta.to_u64().expect("divisor search only at small depth");
    let mut minimal = beta.clone();
    let mut d = 1u64;
    while d * d <= beta_u {
        if beta_u % d == 0 {
            for cand in [d, beta_u / d] {
                if BigUint::from(cand) < minimal && phi.apply_t(&BigUint::from(cand)) == *phi {
                    minimal = BigUint::from(cand);
                }
            }
        }
        d += 1;
    }
    PeriodReport { beta_period: beta, beta_verified, minimal }
}

/// A conservativity witness for a positive-measure cylinder: `n = beta_D`
/// satisfies `mu(C cap f^{-n}(C)) = mu(C) > 0` exactly.
pub fn conservativity_witness(ms: &MeasureSeq, c: &Cylinder) -> (BigUint, BigRational) {
    let n = c.prefix().base().beta(c.depth());
    let back = c.translate(&BigInt::from(n.clone()), Direction::Preimage);
    assert_eq!(&back, c);
    (n, c.measure(ms))
}

/// Outcome sets of the supercyclicity-gap construction.
#[derive(Debug, Clone)]
pub struct ScGapSets {
    pub c_set: CylinderUnion,
    pub d_set: CylinderUnion,
    pub b_set: CylinderUnion,
}

/// Check the supercyclicity-gap construction on explicit data: given `phi`,
/// `lambda > 0`, `k` and `epsilon`, first verify the approximation
/// hypotheses `||phi - 2|| < eps/2` and `||lambda (phi o f^k) + 2|| < eps/2`
/// by exact norms, then build `C = {|lambda phi + 2| < 1}`,
/// `D = {|phi - 2| < 1}`, `B = D cap f^{-k}(C)` and verify
/// `mu(X \ B) < eps`, `mu(f^{-k}(B)) < eps` and `mu(f^k(B)) < eps` exactly.
pub fn sc_gap_checker(
    ms: &MeasureSeq,
    phi: &SimpleFunction,
    lambda: &BigRational,
    k: u64,
    eps: &BigRational,
    p: u32,
) -> (ClaimReport, Option<ScGapSets>) {
    assert!(lambda.is_positive(), "lambda must be a positive real");
    assert!(eps.is_positive());
    let half_eps_pp = pow_abs(&(eps / BigRational::from_integer(2.into())), p);
    let h1 = phi.affine_norm_pp(ms, &BigRational::one(), &BigRational::from_integer((-2).into()), p);
    let shifted = phi.apply_t_u64(k);
    let h2 = shifted.affine_norm_pp(ms, lambda, &BigRational::from_integer(2.into()), p);
    let rep = ClaimReport::new("sc-gap", Verdict::Inconclusive)
        .param("lambda", rat_str(lambda))
        .param("k", k)
        .param("epsilon", rat_str(eps))
        .param("p", p)
        .value_rat("norm_phi_minus_2_pp", &h1)
        .value_rat("norm_lambda_phi_fk_plus_2_pp", &h2);
    if h1 >= half_eps_pp || h2 >= half_eps_pp {
        let mut rep = rep;
        rep.verdict = Verdict::HypothesesNotMet;
        let which = if h1 >= half_eps_pp { "||phi - 2||" } else { "||lambda phi o f^k + 2||" };
        return (rep.note(format!("{which} is not below eps/2")), None);
    }

    let c_set = phi.strict_unit_level_set(lambda, &BigRational::from_integer(2.into()));
    let d_set = phi.strict_unit_level_set(&BigRational::one(), &BigRational::from_integer((-2).into()));
    let pre_c = c_set.translate(&BigInt::from(k), Direction::Preimage);
    let b_set = d_set.intersect(&pre_c).expect("same depth");

    let mu_comp_b = b_set.complement().measure(ms);
    let mu_pre_b = b_set.translate(&BigInt::from(k), Direction::Preimage).measure(ms);
    let mu_img_b = b_set.translate(&BigInt::from(k), Direction::Image).measure(ms);
    let ok = &mu_comp_b < eps && &mu_pre_b < eps && &mu_img_b < eps;
    let mut rep = rep
        .value_rat("mu_complement_B", &mu_comp_b)
        .value_rat("mu_preimage_B", &mu_pre_b)
        .value_rat("mu_image_B", &mu_img_b);
    rep.verdict = if ok { Verdict::Verified } else { Verdict::Refuted };
    (rep, Some(ScGapSets { c_set, d_set, b_set }))
}

/// A set of the form `(full or full-minus-one-cylinder at depth N) x M`
/// with `M` given by a pattern tail: the shape produced by the witness
/// construction. Measures are signed combinations of at most two pattern
/// enclosures.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSet {
    pub main: PatternSet,
    pub minus: Option<PatternSet>,
}

impl WitnessSet {
    pub fn measure(&self, ms: &MeasureSeq, tol: &BigRational, cap: u64) -> Result<RatInterval> {
        let m = self.main.measure(ms, tol, cap)?.interval;
        match &self.minus {
            None => Ok(m),
            Some(s) => Ok(m.sub(&s.measure(ms, tol, cap)?.interval).clamp_lo_zero()),
        }
    }

    pub fn translate_measure(
        &self,
        ms: &MeasureSeq,
        n: &BigUint,
        direction: Direction,
        tol: &BigRational,
        cap: u64,
    ) -> Result<RatInterval> {
        let m = self.main.translate_measure(ms, n, direction, tol, cap)?.interval;
        match &self.minus {
            None => Ok(m),
            Some(s) => {
                let ms_ = s.translate_measure(ms, n, direction, tol, cap)?.interval;
                Ok(m.sub(&ms_).clamp_lo_zero())
            }
        }
    }
}

/// A certified hypercyclicity witness: a set `A` and an exponent `j` with
/// `mu(A) > 1 - eps` and `mu(f^j(A)) < eps`, both enclosures recomputed by
/// the pattern engine independently of the construction path.
#[derive(Debug, Clone)]
pub struct WitnessPair {
    pub set: WitnessSet,
    pub j: BigUint,
    pub epsilon: BigRational,
    pub mu_a: RatInterval,
    pub mu_fj_a: RatInterval,
    /// 0 when the depth-N carry vanished, 1 when it propagated.
    pub carry_case: u8,
    pub n_depth: u64,
}

/// Input to the witness construction: a set `B`, a depth-`N` cylinder whose
/// conditional mass in `B` is close to one, and the tail rule describing
/// `B cap [b] = {b} x M`.
#[derive(Debug, Clone)]
pub struct DensityData {
    pub n_depth: u64,
    pub b_prefix: Prefix,
    pub b_set: PatternSet,
    pub tail: EventualRule,
}

/// Supplies the measurable set `B` and candidate translates `k` with small
/// image measure; the witness procedure certifies every claim it uses.
pub trait WitnessProvider {
    fn density_cylinder(&self, ms: &MeasureSeq, eps: &BigRational) -> Result<DensityData>;
    /// Candidate `k` values, each with digit support extending past `N`.
    fn candidate_translates(&self, data: &DensityData, delta: &BigRational) -> Vec<BigUint>;
}

/// The constructive hypercyclicity-witness procedure: from a set `B` with
/// a density-one cylinder `[b]` and a translate `k` whose image of `B` has
/// certified measure below `delta`, produce `(A, j)` with
/// `mu(A) > 1 - eps` and `mu(f^j(A)) < eps`.
///
/// `k` splits as `k_1 + k_2` with `k_1` supported in `1..=N` and `k_2`
/// beyond; the carry `c` of `b + k_1` out of position `N` selects the case:
/// `c = 0` takes `A = X_{1..N} x M` and `j = k_2`; `c = 1` takes
/// `A = (X_{1..N} minus the zero prefix) x M` and `j` with maximal digits
/// below `N` and the digits of `k_2` above. The output is re-certified
/// independently and the procedure aborts on any failed bound.
pub fn hc_witness(
    ms: &MeasureSeq,
    eps: &BigRational,
    provider: &dyn WitnessProvider,
    tol: &BigRational,
    cap: u64,
) -> Result<WitnessPair> {
    if !eps.is_positive() || eps >= &BigRational::one() {
        return Err(Error::EpsilonOutOfRange);
    }
    let half_eps = eps / BigRational::from_integer(2.into());
    let one_minus_half = BigRational::one() - &half_eps;

    let data = provider.density_cylinder(ms, eps)?;
    let n_depth = data.n_depth;
    let base = ms.base();
    assert_eq!(data.b_prefix.depth() as u64, n_depth);

    // density-one cylinder: mu(B cap [b]) / mu([b]) = mu_{[N+1,oo)}(M)
    let m_pattern = PatternSet::new(base, BTreeMap::new(), shifted_tail(data.tail, n_depth));
    let mu_m = m_pattern.measure(ms, tol, cap)?.interval;
    if mu_m.lo <= one_minus_half {
        return Err(Error::CertificationFailure(format!(
            "density cylinder ratio lower bound {} not above 1 - eps/2",
            rat_str(&mu_m.lo)
        )));
    }

    // delta = eps/2 * min over depth-N cylinders of their measure
    let mut min_cyl = BigRational::one();
    for i in 1..=n_depth {
        min_cyl *= ms.min_mass(i);
    }
    let delta = &half_eps * &min_cyl;

    // the paper's N-condition, needed only when the carry case is 1
    let mut prod_zero = BigRational::one();
    for i in 1..=n_depth {
        prod_zero *= ms.digit_mass(i, 0);
    }
    let zero_prefix_small = prod_zero < half_eps;

    let beta_n = base.beta(n_depth as usize);
    let mut chosen: Option<(BigUint, BigUint, u8)> = None; // (k, k2, carry)
    for k in provider.candidate_translates(&data, &delta) {
        let k1 = &k % &beta_n;
        let k2 = &k - &k1;
        if k2.is_zero() {
            continue; // digit support must extend past N
        }
        // certified mu(f^k(B)) < delta
        let img = data
            .b_set
            .translate_measure(ms, &k, Direction::Image, &(&delta / BigRational::from_integer(4.into())), cap)?;
        if img.interval.hi >= delta {
            continue;
        }
        let t1 = crate::mixed_radix::MixedRadixDigits::to_digits(&k1, base);
        let (_, carry) = data.b_prefix.add_with_carry(&t1, false);
        let c = carry as u8;
        if c == 1 && !zero_prefix_small {
            // Case 2 needs the zero-prefix product below eps/2
            continue;
        }
        chosen = Some((k, k2, c));
        break;
    }
    let Some((_k, k2, carry_case)) = chosen else {
        return Err(Error::ProviderFailure);
    };

    let (set, j) = if carry_case == 0 {
        let main = PatternSet::new(base, BTreeMap::new(), shifted_tail(data.tail, n_depth));
        (WitnessSet { main, minus: None }, k2)
    } else {
        let main = PatternSet::new(base, BTreeMap::new(), shifted_tail(data.tail, n_depth));
        let mut zero_constraints = BTreeMap::new();
        for i in 1..=n_depth {
            zero_constraints.insert(i, std::collections::BTreeSet::from([0u32]));
        }
        let minus = PatternSet::new(base, zero_constraints, shifted_tail(data.tail, n_depth));
        // j has maximal digits below N and the digits of k_2 above
        let j = (&beta_n - BigUint::one()) + &k2;
        (WitnessSet { main, minus: Some(minus) }, j)
    };

    // independent re-certification by the pattern engine
    let mu_a = set.measure(ms, tol, cap)?;
    let mu_fj_a = set.translate_measure(ms, &j, Direction::Image, tol, cap)?;
    let one_minus_eps = BigRational::one() - eps;
    if mu_a.lo <= one_minus_eps {
        return Err(Error::CertificationFailure(format!(
            "mu(A) lower bound {} not above 1 - eps",
            rat_str(&mu_a.lo)
        )));
    }
    if &mu_fj_a.hi >= eps {
        return Err(Error::CertificationFailure(format!(
            "mu(f^j(A)) upper bound {} not below eps",
            rat_str(&mu_fj_a.hi)
        )));
    }
    Ok(WitnessPair { set, j, epsilon: eps.clone(), mu_a, mu_fj_a, carry_case, n_depth })
}

/// The tail rule of `M` viewed on the whole space: constraints start after
/// coordinate `N` in every case this construction produces.
fn shifted_tail(tail: EventualRule, n_depth: u64) -> EventualRule {
    match tail {
        EventualRule::Free => EventualRule::Free,
        EventualRule::ZeroOffMarkers { from } => {
            EventualRule::ZeroOffMarkers { from: from.max(n_depth + 1) }
        }
    }
}
