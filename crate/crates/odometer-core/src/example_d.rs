//! The dyadic marker system: base 2 with markers `m_k = 4^k`, the sets
//! `B_k` and `I_k`, carry classes `D(n, c)`, and the verifiers for the
//! distributional-chaos construction.
//!
//! Everything here reports through `ClaimReport`: verdicts come only from
//! exact rational comparisons or certified enclosures strictly on one side
//! of the relevant threshold.

use crate::exec::{map_collect, ExecPolicy};
use crate::measure::{marker, CoordFilter, MeasureSeq, RatInterval};
use crate::mixed_radix::{BaseSeq, MixedRadixDigits};
use crate::pattern::{Direction, EventualRule, PatternSet};
use crate::report::{ClaimReport, Verdict};
use crate::{rat, Result};
use num::{BigRational, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::{BTreeMap, BTreeSet};

/// The marker measure system: base 2 everywhere, `m_k = 4^k`,
/// `p_n = 2^{-n}` off markers and `p_{m_k} = 2^{-k}` at them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkerSystem;

impl MarkerSystem {
    pub fn marker(k: u32) -> u64 {
        marker(k)
    }

    pub fn p(n: u64) -> BigRational {
        crate::measure::example_d_p(n)
    }

    pub fn measure_seq() -> MeasureSeq {
        MeasureSeq::example_d()
    }
}

/// `B_k`: coordinate `m_k` equals 1, every later off-marker coordinate
/// equals 0; coordinates below `m_k` and markers above it are free.
pub fn b_set(k: u32) -> PatternSet {
    assert!(k >= 1);
    let mk = marker(k);
    let base = BaseSeq::dyadic();
    let mut allowed = BTreeMap::new();
    allowed.insert(mk, BTreeSet::from([1u32]));
    PatternSet::new(&base, allowed, EventualRule::ZeroOffMarkers { from: mk + 1 })
}

/// Membership in `I_k`, checked digit by digit: no binary digit above
/// `m_{k+1}-3` and at least one digit in `[m_k+3, m_{k+1}-3]`.
pub fn i_membership(n: &BigUint, k: u32) -> bool {
    assert!(k >= 1);
    if n.is_zero() {
        return false;
    }
    let hi = marker(k + 1) - 3;
    let lo = marker(k) + 3;
    // bits() is the 1-based position of the top digit
    let top = n.bits();
    if top > hi {
        return false;
    }
    (lo..=hi).any(|i| n.bit(i - 1))
}

/// `|I_k|` by the closed form `2^{m_{k+1}-3} - 2^{m_k+2}`.
pub fn i_count_formula(k: u32) -> BigUint {
    assert!(k >= 1);
    crate::pow2(marker(k + 1) - 3) - crate::pow2(marker(k) + 2)
}

/// `|I_k|` counted independently: numbers with top digit at position `i`
/// number `2^{i-1}`, summed over the admissible top positions.
pub fn i_count_by_top_digit(k: u32) -> BigUint {
    let mut total = BigUint::zero();
    for i in (marker(k) + 3)..=(marker(k + 1) - 3) {
        total += crate::pow2(i - 1);
    }
    total
}

pub fn claim1_verify(k: u32) -> ClaimReport {
    assert!(k >= 1);
    let formula = i_count_formula(k);
    let mut rep = ClaimReport::new("claim1", Verdict::Inconclusive)
        .param("k", k)
        .value_str("formula", &formula);
    if k == 1 {
        // exhaustive over every candidate: members have no digit above 13
        let mut count = BigUint::zero();
        for n in 1u64..(1 << (marker(2) - 3)) {
            if i_membership(&BigUint::from(n), 1) {
                count += BigUint::one();
            }
        }
        rep = rep.value_str("brute_force_count", &count).note("exhaustive enumeration");
        rep.verdict = if count == formula { Verdict::Verified } else { Verdict::Refuted };
    } else {
        let cross = i_count_by_top_digit(k);
        rep = rep.value_str("top_digit_count", &cross).note("independent top-digit count");
        rep.verdict = if cross == formula { Verdict::Verified } else { Verdict::Refuted };
    }
    rep
}

pub fn claim2_density(k: u32) -> ClaimReport {
    assert!(k >= 1);
    let window = crate::pow2(marker(k + 1) - 3);
    // blocks I_1, ..., I_k are disjoint and all lie inside the window
    let mut in_window = BigUint::zero();
    for l in 1..=k {
        in_window += i_count_formula(l);
    }
    let ratio = BigRational::new(in_window.clone().into(), window.clone().into());
    let exponent = marker(k + 1) - marker(k) - 5;
    let bound = BigRational::one() - crate::pow2_inv(exponent);
    let mut rep = ClaimReport::new("claim2", Verdict::Inconclusive)
        .param("k", k)
        .value_rat("ratio", &ratio)
        .value_rat("bound", &bound)
        .value_str("count_in_window", &in_window);
    if k == 1 {
        // only I_1 meets the window; recount it exhaustively
        let mut count = BigUint::zero();
        for n in 1u64..=window.to_u64().expect("k=1 window fits") {
            if i_membership(&BigUint::from(n), 1) {
                count += BigUint::one();
            }
        }
        if count != in_window {
            rep.verdict = Verdict::Refuted;
            return rep.note("exhaustive count disagrees with closed form");
        }
        rep = rep.note("exhaustive recount agrees");
    }
    rep.verdict = if ratio >= bound { Verdict::Verified } else { Verdict::Refuted };
    if ratio == bound {
        rep = rep.note("ratio meets the bound with equality");
    }
    rep
}

/// `mu(B_k) < 1/k` for `k = 1..=kmax`, plus the strict decrease of the
/// chain, via certified enclosures.
pub fn b_measure_chain(kmax: u32, tol: &BigRational, cap: u64) -> Result<ClaimReport> {
    assert!(kmax >= 1);
    let ms = MeasureSeq::example_d();
    let mut rep = ClaimReport::new("b-measure-chain", Verdict::Verified).param("kmax", kmax);
    let mut prev: Option<RatInterval> = None;
    for k in 1..=kmax {
        let enc = b_set(k).measure(&ms, tol, cap)?.interval;
        let target = BigRational::new(BigUint::one().into(), BigUint::from(k).into());
        if enc.hi >= target {
            rep.verdict = Verdict::Refuted;
            rep = rep.note(format!("mu(B_{k}) upper bound not below 1/{k}"));
        }
        if let Some(p) = &prev {
            if enc.hi >= p.lo {
                rep.verdict = Verdict::Refuted;
                rep = rep.note(format!("chain not strictly decreasing at k={k}"));
            }
        }
        rep = rep.value_interval(&format!("mu_B_{k}"), &enc);
        prev = Some(enc);
    }
    Ok(rep)
}

/// Sampling plan for a DC1 scan over `I_l`.
#[derive(Debug, Clone)]
pub struct Dc1Options {
    /// Random members of `I_l`, drawn with a top-digit-stratified sampler.
    pub samples: u64,
    pub seed: u64,
    /// Additionally include the smallest members `2^{m_l+2} + 0..s`.
    pub smallest: u64,
    pub tol: BigRational,
    pub cap: u64,
}

impl Default for Dc1Options {
    fn default() -> Self {
        Dc1Options { samples: 100, seed: 1, smallest: 10, tol: crate::default_tol(), cap: 4096 }
    }
}

/// A random member of `I_l`: uniform top-digit position in the admissible
/// range, then uniform lower digits. Covers all of `I_l` with full support.
fn sample_i_member(rng: &mut ChaCha20Rng, l: u32) -> BigUint {
    let lo = marker(l) + 3;
    let hi = marker(l + 1) - 3;
    let top = rng.gen_range(lo..=hi);
    let mut n = crate::pow2(top - 1);
    let mut i = 0u64;
    while i < top - 1 {
        let chunk = (top - 1 - i).min(32);
        let bits: u32 = rng.gen();
        let mask = if chunk == 32 { u32::MAX } else { (1u32 << chunk) - 1 };
        n += BigUint::from(bits & mask) << i;
        i += chunk;
    }
    n
}

/// For sampled `n` in `I_l` with `l > k`, certify
/// `mu(f^{-n}(B_k)) < 1/l`, and report the forced-coordinate bound
/// `<= 2^{-(m_l+2)}` whenever a largest index `i'` in `[m_l+2, m_{l+1}-3]`
/// with `-n(i') = 0` and `-n(i'+1) = 1` exists.
pub fn dc1_scan(k: u32, l: u32, opts: &Dc1Options, policy: ExecPolicy) -> Result<ClaimReport> {
    assert!(l > k && k >= 1);
    let ms = MeasureSeq::example_d();
    let base = BaseSeq::dyadic();
    let b = b_set(k);
    let threshold = BigRational::new(BigUint::one().into(), BigUint::from(l).into());
    let forced_bound = crate::pow2_inv(marker(l) + 2);

    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut ns: Vec<BigUint> = Vec::new();
    let first = crate::pow2(marker(l) + 2);
    for i in 0..opts.smallest {
        ns.push(&first + BigUint::from(i));
    }
    for _ in 0..opts.samples {
        ns.push(sample_i_member(&mut rng, l));
    }
    for n in &ns {
        assert!(i_membership(n, l));
    }

    let results = map_collect(policy, ns, |n| {
        let enc = b.translate_measure(&ms, n, Direction::Preimage, &opts.tol, opts.cap);
        let forced = forced_coordinate_applies(n, l, &base);
        (n.clone(), enc, forced)
    });

    let mut rep = ClaimReport::new("dc1", Verdict::Verified)
        .param("k", k)
        .param("l", l)
        .param("samples", opts.samples)
        .param("seed", opts.seed)
        .param("smallest", opts.smallest)
        .param("rng", "chacha20, top-digit-stratified");
    let mut worst = BigRational::zero();
    let mut forced_count = 0u64;
    let mut inconclusive = 0u64;
    for (n, enc, forced) in results {
        let enc = match enc {
            Ok(tp) if tp.converged => tp.interval,
            Ok(_) | Err(_) => {
                inconclusive += 1;
                rep.verdict = Verdict::Inconclusive;
                continue;
            }
        };
        if enc.lo >= threshold {
            rep.verdict = Verdict::Refuted;
            rep = rep.note(format!("certified lower bound at n={n} reaches 1/{l}"));
            continue;
        }
        if enc.hi >= threshold {
            inconclusive += 1;
            if rep.verdict == Verdict::Verified {
                rep.verdict = Verdict::Inconclusive;
            }
            continue;
        }
        if forced {
            forced_count += 1;
            if enc.hi > forced_bound {
                rep.verdict = Verdict::Refuted;
                rep = rep.note(format!("forced-coordinate bound violated at n={n}"));
            }
        }
        if enc.hi > worst {
            worst = enc.hi.clone();
        }
    }
    rep = rep
        .value_rat("max_upper_bound", &worst)
        .value_rat("forced_bound", &forced_bound)
        .value_str("forced_count", forced_count)
        .value_str("inconclusive", inconclusive);
    Ok(rep)
}

/// Largest `i'` in `[m_l+2, m_{l+1}-3]` with `-n(i') = 0` and
/// `-n(i'+1) = 1`; when it exists, coordinate `i'+1` of every preimage
/// point is forced to 1.
fn forced_coordinate_applies(n: &BigUint, l: u32, base: &BaseSeq) -> bool {
    let t = MixedRadixDigits::neg_digits(n, base).expect("n >= 1");
    let lo = marker(l) + 2;
    let hi = marker(l + 1) - 3;
    (lo..=hi).rev().any(|i| t.digit(i as usize) == 0 && t.digit(i as usize + 1) == 1)
}

/// The carry class of one `-n` digit window: exact masses of the prefixes
/// of length `w` whose addition to the window produces carry 0 or 1 into
/// coordinate `w + 1`. Each prefix is weighted by its own digit masses.
pub fn window_carry_masses(ms: &MeasureSeq, window: &[u32]) -> (BigRational, BigRational) {
    window_masses(ms, window, false)
}

/// Carry-class masses weighted by the translated digits instead: the mass
/// of the image windows `y = x + t` within each carry class. This is the
/// measure of the first factor of the translated product set, which is the
/// quantity the per-element lower bound needs.
pub fn window_image_masses(ms: &MeasureSeq, window: &[u32]) -> (BigRational, BigRational) {
    window_masses(ms, window, true)
}

fn window_masses(ms: &MeasureSeq, window: &[u32], image_weighted: bool) -> (BigRational, BigRational) {
    let mut mass = [BigRational::one(), BigRational::zero()];
    for (idx, &ti) in window.iter().enumerate() {
        let i = idx as u64 + 1;
        let mut next = [BigRational::zero(), BigRational::zero()];
        for c in 0..2u32 {
            if mass[c as usize].is_zero() {
                continue;
            }
            for x in 0..2u32 {
                let s = x + ti + c;
                let weight_digit = if image_weighted { s & 1 } else { x };
                next[(s >> 1) as usize] += &mass[c as usize] * ms.digit_mass(i, weight_digit);
            }
        }
        mass = next;
    }
    let [m0, m1] = mass;
    (m0, m1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarryClass {
    /// The majority class `c(n)`; ties at exactly 1/2 resolve to 0.
    pub c: u8,
    pub mass0: BigRational,
    pub mass1: BigRational,
}

/// `c(n)` and the masses of `D(n, 0)`, `D(n, 1)` over the window
/// `[1, m_k - 2]`, from the `-n` digits.
pub fn carry_class(n: u64, k: u32) -> CarryClass {
    let w = marker(k) - 2;
    assert!(n >= 1 && BigUint::from(n) < crate::pow2(w));
    let ms = MeasureSeq::example_d();
    let base = BaseSeq::dyadic();
    let t = MixedRadixDigits::neg_digits(&BigUint::from(n), &base).expect("n >= 1");
    let window: Vec<u32> = (1..=w).map(|i| t.digit(i as usize)).collect();
    let (mass0, mass1) = window_carry_masses(&ms, &window);
    let c = if mass0 >= rat(1, 2) { 0 } else { 1 };
    CarryClass { c, mass0, mass1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dc2Window {
    /// `1 <= n <= 2^{m_k - 1}`, denominator `2^{m_k - 1}`.
    Statement,
    /// `1 <= n <= 2^{m_k} - 1`, denominator `2^{m_k} - 1`.
    Proof,
}

impl Dc2Window {
    pub fn label(&self) -> &'static str {
        match self {
            Dc2Window::Statement => "statement",
            Dc2Window::Proof => "proof",
        }
    }
}

/// Count translations with certified `mu(f^{-n}(B_k)) > 1/16` over the
/// chosen window, reconstruct `J` from the carry classes and the `-n`
/// digit conditions, and cross-check the per-element four-factor bound.
pub fn dc2_count(
    k: u32,
    window: Dc2Window,
    tol: &BigRational,
    cap: u64,
    policy: ExecPolicy,
) -> Result<ClaimReport> {
    assert!(k >= 1);
    let ms = MeasureSeq::example_d();
    let base = BaseSeq::dyadic();
    let mk = marker(k);
    let w = mk - 2;
    let b = b_set(k);
    let threshold = rat(1, 16);

    let mut rep = ClaimReport::new("dc2", Verdict::Inconclusive)
        .param("k", k)
        .param("window", window.label())
        .param("tie_rule", "carry class ties resolve to 0");

    // the three factors the proof needs above 1/2
    let mu_a = ms.digit_mass(mk - 1, 0);
    let mu_b = ms.digit_mass(mk, 0);
    let tail = ms.tail_product_bounds(mk, CoordFilter::OffMarkers, 0, tol, cap)?;
    let half = rat(1, 2);
    let factors_ok =
        tail.converged && mu_a > half && mu_b > half && tail.interval.lo > half;
    rep = rep
        .value_rat("mu_mk_minus_1_of_0", &mu_a)
        .value_rat("mu_mk_of_0", &mu_b)
        .value_interval("tail_T_k", &tail.interval);
    if !factors_ok {
        rep = rep.note("a proof factor is not above 1/2; k is not sufficiently large");
    }

    // majority carry class over the window numbers; the class of a window
    // is decided by the mass of its translated prefixes, since that is the
    // first factor of the product-set measure below. The prefix-weighted
    // tallies are reported alongside for reference.
    let wn_end = crate::pow2(w).to_u64().expect("window count fits") - 1;
    let classes: Vec<(u8, u8)> = map_collect(policy, (1..=wn_end).collect(), |n| {
        let t = MixedRadixDigits::neg_digits(&BigUint::from(*n), &base).expect("n >= 1");
        let v: Vec<u32> = (1..=w).map(|i| t.digit(i as usize)).collect();
        let (y0, _) = window_image_masses(&ms, &v);
        let (x0, _) = window_carry_masses(&ms, &v);
        let cy = if y0 >= rat(1, 2) { 0u8 } else { 1 };
        let cx = if x0 >= rat(1, 2) { 0u8 } else { 1 };
        (cy, cx)
    });
    let f0 = classes.iter().filter(|&&(cy, _)| cy == 0).count() as u64;
    let f1 = wn_end - f0;
    let f0_prefix = classes.iter().filter(|&&(_, cx)| cx == 0).count() as u64;
    let case: u8 = if f0 >= f1 { 0 } else { 1 };
    rep = rep
        .value_str("f0", f0)
        .value_str("f1", f1)
        .value_str("f0_prefix_weighted", f0_prefix)
        .value_str("f1_prefix_weighted", wn_end - f0_prefix)
        .param("case", case);

    // certified per-n bounds over the chosen window
    let n_end = match window {
        Dc2Window::Statement => crate::pow2(mk - 1).to_u64().expect("window fits"),
        Dc2Window::Proof => crate::pow2(mk).to_u64().expect("window fits") - 1,
    };
    let denom = BigRational::from_integer(n_end.into());
    let bounds: Vec<RatInterval> = map_collect(policy, (1..=n_end).collect(), |n| {
        b.translate_measure(&ms, &BigUint::from(*n), Direction::Preimage, tol, cap)
            .map(|tp| tp.interval)
            .unwrap_or_else(|_| RatInterval::new(BigRational::zero(), BigRational::one()))
    });
    let mut pass = 0u64;
    let mut inconclusive = 0u64;
    for enc in &bounds {
        if enc.lo > threshold {
            pass += 1;
        } else if enc.hi > threshold {
            inconclusive += 1;
        }
    }
    let fraction = BigRational::from_integer(pass.into()) / &denom;
    rep = rep
        .value_str("pass_count", pass)
        .value_str("inconclusive", inconclusive)
        .value_str("window_size", n_end)
        .value_rat("pass_fraction", &fraction);

    // J: window digits of -n in the majority class, with the
    // (m_k - 1, m_k) digits of -n fixed by the case
    let proof_end = crate::pow2(mk).to_u64().expect("window fits") - 1;
    let (da, db) = if case == 0 { (0u32, 1u32) } else { (1u32, 0u32) };
    let j_flags: Vec<Option<BigRational>> = map_collect(policy, (1..=proof_end).collect(), |n| {
        let t = MixedRadixDigits::neg_digits(&BigUint::from(*n), &base).expect("n >= 1");
        if t.digit((mk - 1) as usize) != da || t.digit(mk as usize) != db {
            return None;
        }
        let v: Vec<u32> = (1..=w).map(|i| t.digit(i as usize)).collect();
        if v.iter().all(|&d| d == 0) {
            return None; // the window must come from some n' >= 1
        }
        let (m0, m1) = window_image_masses(&ms, &v);
        let in_class = if case == 0 { m0 >= half } else { m1 > half };
        if !in_class {
            return None;
        }
        Some(if case == 0 { m0 } else { m1 })
    });
    let j_count = j_flags.iter().filter(|f| f.is_some()).count() as u64;
    let j_fraction =
        BigRational::from_integer(j_count.into()) / BigRational::from_integer(proof_end.into());
    rep = rep.value_str("j_count", j_count).value_rat("j_fraction", &j_fraction);

    // per-element four-factor bound, checked against the DP enclosure
    let mut four_factor_ok = true;
    let mut min_four_factor: Option<BigRational> = None;
    for (idx, flag) in j_flags.iter().enumerate() {
        let Some(dmass) = flag else { continue };
        let four = dmass * &mu_a * &mu_b * &tail.interval.lo;
        if four < threshold {
            four_factor_ok = false;
        }
        let n = idx as u64 + 1;
        if n <= n_end && bounds[idx].lo < four {
            four_factor_ok = false;
        }
        if min_four_factor.as_ref().map_or(true, |m| &four < m) {
            min_four_factor = Some(four);
        }
    }
    if let Some(m) = &min_four_factor {
        rep = rep.value_rat("min_four_factor", m);
    }
    if !four_factor_ok {
        rep = rep.note("a four-factor lower bound failed");
    }

    let j_ok = j_fraction >= threshold;
    rep.verdict = if !factors_ok {
        Verdict::Inconclusive
    } else if fraction > threshold && j_ok && four_factor_ok {
        Verdict::Verified
    } else if inconclusive == 0 {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    };
    Ok(rep)
}

/// Witness provider backed by the `B_k` family: the density cylinder fixes
/// the digits `1..=m_k` with a 1 at `m_k`, and translates are the powers
/// `2^{m_j+2}` for `j > k`, whose image measure is forced small.
#[derive(Debug, Clone, Copy)]
pub struct MarkerWitnessProvider {
    /// Largest family index tried for the density cylinder.
    pub max_family_index: u32,
    /// Number of marker exponents tried for the translate.
    pub translate_attempts: u32,
}

impl Default for MarkerWitnessProvider {
    fn default() -> Self {
        MarkerWitnessProvider { max_family_index: 4, translate_attempts: 4 }
    }
}

impl crate::operator::WitnessProvider for MarkerWitnessProvider {
    fn density_cylinder(
        &self,
        ms: &MeasureSeq,
        eps: &BigRational,
    ) -> Result<crate::operator::DensityData> {
        let base = BaseSeq::dyadic();
        let tol = crate::default_tol();
        let target = BigRational::one() - eps / rat(2, 1);
        for k in 1..=self.max_family_index {
            let n_depth = marker(k);
            let m = PatternSet::new(
                &base,
                BTreeMap::new(),
                EventualRule::ZeroOffMarkers { from: n_depth + 1 },
            );
            let enc = m.measure(ms, &tol, 4096)?;
            if !enc.converged || enc.interval.lo <= target {
                continue;
            }
            // any b with b(m_k) = 1 satisfies B_k cap [b] = {b} x M
            let mut digits = vec![0u32; n_depth as usize];
            digits[n_depth as usize - 1] = 1;
            return Ok(crate::operator::DensityData {
                n_depth,
                b_prefix: crate::mixed_radix::Prefix::from_digits(digits, &base),
                b_set: b_set(k),
                tail: EventualRule::ZeroOffMarkers { from: n_depth + 1 },
            });
        }
        Err(crate::Error::ProviderFailure)
    }

    fn candidate_translates(
        &self,
        data: &crate::operator::DensityData,
        _delta: &BigRational,
    ) -> Vec<BigUint> {
        let k = (1..).find(|&k| marker(k) == data.n_depth).expect("marker depth");
        (1..=self.translate_attempts).map(|i| crate::pow2(marker(k + i) + 2)).collect()
    }
}
