//! Positional arithmetic over a base sequence `{alpha_n}`: digit
//! representations of `+k` and `-k`, addition with carry, the odometer
//! successor, and the prefix-level group action.
//!
//! Positions are 1-based throughout, matching the usual `k(1), k(2), ...`
//! indexing of mixed-radix expansions.

use crate::{Error, Result};
use num::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The base sequence `{alpha_n}`, given as an explicit prefix followed by a
/// constant default. `alpha(n) >= 2` for every `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSeq {
    prefix: Vec<u32>,
    default: u32,
}

impl BaseSeq {
    pub fn constant(alpha: u32) -> Self {
        assert!(alpha >= 2, "alpha must be >= 2");
        BaseSeq { prefix: Vec::new(), default: alpha }
    }

    pub fn with_prefix(prefix: Vec<u32>, default: u32) -> Self {
        assert!(default >= 2, "default alpha must be >= 2");
        assert!(prefix.iter().all(|&a| a >= 2), "every alpha must be >= 2");
        BaseSeq { prefix, default }
    }

    /// The dyadic base: alpha_n = 2 for all n.
    pub fn dyadic() -> Self {
        Self::constant(2)
    }

    /// `alpha(n)` for 1-based position `n`.
    pub fn alpha(&self, n: usize) -> u32 {
        assert!(n >= 1, "positions are 1-based");
        *self.prefix.get(n - 1).unwrap_or(&self.default)
    }

    /// `beta_d = alpha(1) * ... * alpha(d)`, with `beta_0 = 1`.
    pub fn beta(&self, d: usize) -> BigUint {
        let mut b = BigUint::one();
        for n in 1..=d {
            b *= BigUint::from(self.alpha(n));
        }
        b
    }

    pub fn is_constant(&self, alpha: u32) -> bool {
        self.default == alpha && self.prefix.iter().all(|&a| a == alpha)
    }
}

/// Tail behavior of a digit sequence beyond its explicit window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitTail {
    /// All digits zero beyond the window: the representation of `+k`.
    Zeros,
    /// All digits maximal (`alpha(i)-1`) beyond the window: `-k`.
    Max,
}

/// A digit sequence representing `+k` (finite support) or `-k`
/// (eventually-maximal tail) relative to a base sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedRadixDigits {
    base: BaseSeq,
    window: Vec<u32>,
    tail: DigitTail,
}

impl MixedRadixDigits {
    /// The mixed-radix expansion of a nonnegative integer `k`.
    pub fn to_digits(k: &BigUint, base: &BaseSeq) -> Self {
        let mut window = Vec::new();
        let mut rest = k.clone();
        let mut pos = 1usize;
        while !rest.is_zero() {
            let a = BigUint::from(base.alpha(pos));
            let d = (&rest % &a).to_u32().expect("digit fits in u32");
            window.push(d);
            rest /= a;
            pos += 1;
        }
        let mut out = MixedRadixDigits { base: base.clone(), window, tail: DigitTail::Zeros };
        out.normalize();
        out
    }

    /// The representation of `-k` in the odometer group: zero below the least
    /// nonzero digit `j` of `k`, `alpha(j)-k(j)` at `j`, and
    /// `alpha(i)-k(i)-1` above. Rejects `k = 0`.
    pub fn neg_digits(k: &BigUint, base: &BaseSeq) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::NegOfZero);
        }
        let pos = Self::to_digits(k, base);
        let j = pos
            .window
            .iter()
            .position(|&d| d != 0)
            .expect("nonzero k has a nonzero digit")
            + 1;
        let mut window = vec![0u32; pos.window.len()];
        for i in 1..=pos.window.len() {
            let a = base.alpha(i);
            let ki = pos.window[i - 1];
            window[i - 1] = if i < j {
                0
            } else if i == j {
                a - ki
            } else {
                a - ki - 1
            };
        }
        let mut out = MixedRadixDigits { base: base.clone(), window, tail: DigitTail::Max };
        out.normalize();
        Ok(out)
    }

    pub fn from_u64(k: u64, base: &BaseSeq) -> Self {
        Self::to_digits(&BigUint::from(k), base)
    }

    /// Digit sequence of `n` for signed `n`: `to_digits` for `n >= 0`,
    /// `neg_digits(-n)` for `n < 0`.
    pub fn from_int(n: &BigInt, base: &BaseSeq) -> Result<Self> {
        if n.is_negative() {
            Self::neg_digits(&(-n).to_biguint().unwrap(), base)
        } else {
            Ok(Self::to_digits(&n.to_biguint().unwrap(), base))
        }
    }

    /// Digit at 1-based position `i`, including the closed-form tail.
    pub fn digit(&self, i: usize) -> u32 {
        assert!(i >= 1);
        if i <= self.window.len() {
            self.window[i - 1]
        } else {
            match self.tail {
                DigitTail::Zeros => 0,
                DigitTail::Max => self.base.alpha(i) - 1,
            }
        }
    }

    pub fn tail(&self) -> DigitTail {
        self.tail
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn base(&self) -> &BaseSeq {
        &self.base
    }

    pub fn is_finite_support(&self) -> bool {
        self.tail == DigitTail::Zeros
    }

    /// Trim the explicit window down to the minimal one; equality of group
    /// elements is decided on this normalized form.
    fn normalize(&mut self) {
        while let Some(&last) = self.window.last() {
            let i = self.window.len();
            let tail_digit = match self.tail {
                DigitTail::Zeros => 0,
                DigitTail::Max => self.base.alpha(i) - 1,
            };
            if last == tail_digit {
                self.window.pop();
            } else {
                break;
            }
        }
    }
}

/// A depth-`D` digit prefix together with its integer value in `[0, beta_D)`.
/// The digit and value views are kept in sync by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefix {
    base: BaseSeq,
    digits: Vec<u32>,
    value: BigUint,
}

impl Prefix {
    pub fn from_digits(digits: Vec<u32>, base: &BaseSeq) -> Self {
        for (i, &d) in digits.iter().enumerate() {
            assert!(d < base.alpha(i + 1), "digit out of range at position {}", i + 1);
        }
        let mut value = BigUint::zero();
        let mut scale = BigUint::one();
        for (i, &d) in digits.iter().enumerate() {
            value += &scale * BigUint::from(d);
            scale *= BigUint::from(base.alpha(i + 1));
        }
        Prefix { base: base.clone(), digits, value }
    }

    pub fn from_value(v: &BigUint, depth: usize, base: &BaseSeq) -> Self {
        assert!(v < &base.beta(depth), "value exceeds beta_D - 1");
        let mut digits = Vec::with_capacity(depth);
        let mut rest = v.clone();
        for n in 1..=depth {
            let a = BigUint::from(base.alpha(n));
            digits.push((&rest % &a).to_u32().unwrap());
            rest /= a;
        }
        Prefix { base: base.clone(), digits, value: v.clone() }
    }

    pub fn zero(depth: usize, base: &BaseSeq) -> Self {
        Self::from_digits(vec![0; depth], base)
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// Digit at 1-based position `i <= depth`.
    pub fn digit(&self, i: usize) -> u32 {
        self.digits[i - 1]
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn base(&self) -> &BaseSeq {
        &self.base
    }

    /// The odometer successor `f(x)` on this prefix: zeros below `l(x)`, the
    /// digit at `l(x)` incremented, unchanged above. On the all-maximal
    /// prefix returns the zero prefix with the carry-out flag set.
    pub fn odometer_step(&self) -> (Prefix, bool) {
        let mut digits = self.digits.clone();
        for i in 1..=digits.len() {
            if digits[i - 1] != self.base.alpha(i) - 1 {
                digits[i - 1] += 1;
                return (Prefix::from_digits(digits, &self.base), false);
            }
            digits[i - 1] = 0;
        }
        (Prefix::from_digits(digits, &self.base), true)
    }

    /// Coordinate-wise addition with carry of a digit sequence `t`, restricted
    /// to positions `1..=depth`. Returns the sum prefix and the carry out of
    /// the last position.
    pub fn add_with_carry(&self, t: &MixedRadixDigits, carry_in: bool) -> (Prefix, bool) {
        let mut digits = Vec::with_capacity(self.depth());
        let mut carry = carry_in as u32;
        for i in 1..=self.depth() {
            let a = self.base.alpha(i);
            let s = self.digit(i) + t.digit(i) + carry;
            digits.push(s % a);
            carry = s / a;
        }
        (Prefix::from_digits(digits, &self.base), carry != 0)
    }
}

/// The action of `f^n` on depth-`D` prefix values: `(v + n) mod beta_D`.
/// The flag records whether `v + (n mod beta_D) >= beta_D`, i.e. the carry
/// into position `D+1` when `n >= 0` has support in `1..=D`.
pub fn prefix_translate(v: &BigUint, n: &BigInt, depth: usize, base: &BaseSeq) -> (BigUint, bool) {
    let beta = BigInt::from(base.beta(depth));
    let n_mod = ((n % &beta) + &beta) % &beta;
    let sum = BigInt::from(v.clone()) + &n_mod;
    let carry = sum >= beta;
    let v2 = if carry { sum - &beta } else { sum };
    (v2.to_biguint().unwrap(), carry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(k: u64) -> BigUint {
        BigUint::from(k)
    }

    #[test]
    fn to_digits_examples() {
        let dyadic = BaseSeq::dyadic();
        let zero = MixedRadixDigits::to_digits(&b(0), &dyadic);
        assert_eq!(zero.window_len(), 0);
        assert!(zero.is_finite_support());

        // k=7 over base (2,3,2,...) -> (1,0,1): 1 + 0*2 + 1*6 = 7
        let base = BaseSeq::with_prefix(vec![2, 3, 2], 2);
        let d = MixedRadixDigits::to_digits(&b(7), &base);
        assert_eq!((d.digit(1), d.digit(2), d.digit(3), d.digit(4)), (1, 0, 1, 0));

        // k=6 dyadic -> (0,1,1), little-endian binary 110
        let d = MixedRadixDigits::to_digits(&b(6), &dyadic);
        assert_eq!((d.digit(1), d.digit(2), d.digit(3), d.digit(4)), (0, 1, 1, 0));
    }

    #[test]
    fn neg_digits_examples() {
        let dyadic = BaseSeq::dyadic();
        // -1 dyadic: all ones
        let d = MixedRadixDigits::neg_digits(&b(1), &dyadic).unwrap();
        assert_eq!(d.window_len(), 0);
        for i in 1..=10 {
            assert_eq!(d.digit(i), 1);
        }
        // -6 dyadic: (0,1,0,1,1,1,...)
        let d = MixedRadixDigits::neg_digits(&b(6), &dyadic).unwrap();
        assert_eq!((d.digit(1), d.digit(2), d.digit(3), d.digit(4), d.digit(5)), (0, 1, 0, 1, 1));
        // -4 dyadic: (0,0,1,1,1,...)
        let d = MixedRadixDigits::neg_digits(&b(4), &dyadic).unwrap();
        assert_eq!((d.digit(1), d.digit(2), d.digit(3), d.digit(4)), (0, 0, 1, 1));
        assert!(matches!(MixedRadixDigits::neg_digits(&b(0), &dyadic), Err(Error::NegOfZero)));
    }

    #[test]
    fn neg_digits_cancel_by_carry_addition() {
        let dyadic = BaseSeq::dyadic();
        for k in 1u64..200 {
            let pos = MixedRadixDigits::to_digits(&b(k), &dyadic);
            let neg = MixedRadixDigits::neg_digits(&b(k), &dyadic).unwrap();
            // y + k must be the zero element: check a long prefix.
            let depth = 16;
            let x = Prefix::zero(depth, &dyadic);
            let (xk, _) = x.add_with_carry(&pos, false);
            let (sum, _) = xk.add_with_carry(&neg, false);
            assert!(sum.value().is_zero(), "k={k}");
        }
    }

    #[test]
    fn odometer_step_examples() {
        let dyadic = BaseSeq::dyadic();
        let (next, carry) = Prefix::from_digits(vec![1, 1, 0], &dyadic).odometer_step();
        assert_eq!(next.digits(), &[0, 0, 1]);
        assert!(!carry);

        let (next, carry) = Prefix::from_digits(vec![1, 1, 1], &dyadic).odometer_step();
        assert_eq!(next.digits(), &[0, 0, 0]);
        assert!(carry);

        let base = BaseSeq::with_prefix(vec![2, 3], 2);
        let (next, carry) = Prefix::from_digits(vec![1, 2], &base).odometer_step();
        assert_eq!(next.digits(), &[0, 0]);
        assert!(carry);
    }

    #[test]
    fn add_with_carry_examples() {
        let dyadic = BaseSeq::dyadic();
        let x = Prefix::from_digits(vec![0, 1, 1], &dyadic);
        let t = MixedRadixDigits::from_u64(6, &dyadic);
        let (sum, carry) = x.add_with_carry(&t, false);
        assert_eq!(sum.digits(), &[0, 0, 1]); // 6+6 = 12 = 4 mod 8
        assert!(carry);

        let zero = Prefix::zero(3, &dyadic);
        let t = MixedRadixDigits::from_u64(5, &dyadic);
        let (sum, carry) = zero.add_with_carry(&t, false);
        assert_eq!(sum.value(), &b(5));
        assert!(!carry);

        let x = Prefix::from_digits(vec![1, 1], &dyadic);
        let t = MixedRadixDigits::neg_digits(&b(1), &dyadic).unwrap();
        let (sum, carry) = x.add_with_carry(&t, false);
        assert_eq!(sum.digits(), &[0, 1]); // 3 - 1 = 2, wrap carry
        assert!(carry);
    }

    #[test]
    fn prefix_translate_examples() {
        let dyadic = BaseSeq::dyadic();
        let (v, _) = prefix_translate(&b(3), &BigInt::from(-3), 2, &dyadic);
        assert!(v.is_zero());
        let (v, _) = prefix_translate(&b(5), &BigInt::from(8), 3, &dyadic);
        assert_eq!(v, b(5));
        let base = BaseSeq::with_prefix(vec![2, 3], 2);
        let (v, _) = prefix_translate(&b(1), &BigInt::from(2), 2, &base);
        assert_eq!(v, b(3));
    }

    #[test]
    fn round_trip_and_prefix_locality() {
        // For all k < beta_D, adding to_digits(k) to the zero prefix gives
        // the depth-D prefix of k; and for finite-support t inside the
        // window, the depth-D prefix of x+t depends only on x's prefix.
        let base = BaseSeq::with_prefix(vec![2, 3, 2], 3);
        let depth = 5;
        let beta = base.beta(depth).to_u64().unwrap();
        for k in 0..beta {
            let t = MixedRadixDigits::from_u64(k, &base);
            let (p, carry) = Prefix::zero(depth, &base).add_with_carry(&t, false);
            assert_eq!(p.value(), &b(k));
            assert!(!carry);
        }
        for v in 0..beta {
            for n in 0..beta {
                let x = Prefix::from_value(&b(v), depth, &base);
                let t = MixedRadixDigits::from_u64(n, &base);
                let (sum, _) = x.add_with_carry(&t, false);
                let (expect, _) = prefix_translate(&b(v), &BigInt::from(n), depth, &base);
                assert_eq!(sum.value(), &expect);
            }
        }
    }

    #[test]
    fn step_equals_translate_by_one() {
        let base = BaseSeq::with_prefix(vec![3, 2], 2);
        let depth = 4;
        let beta = base.beta(depth).to_u64().unwrap();
        for v in 0..beta {
            let x = Prefix::from_value(&b(v), depth, &base);
            let (next, carry) = x.odometer_step();
            let (expect, carry2) = prefix_translate(&b(v), &BigInt::one(), depth, &base);
            assert_eq!(next.value(), &expect);
            assert_eq!(carry, carry2);
        }
    }
}
