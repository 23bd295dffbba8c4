//! Exact arithmetic for odometer systems on infinite product probability
//! spaces and the composition operators they induce.
//!
//! Everything verdict-bearing is computed with arbitrary-precision rationals;
//! infinite products and tail sums are enclosed in certified intervals.

pub mod example_d;
pub mod exec;
pub mod measure;
pub mod mixed_radix;
pub mod operator;
pub mod pattern;
pub mod report;

pub use measure::{MeasureSeq, RatInterval};
pub use mixed_radix::{BaseSeq, MixedRadixDigits, Prefix};
pub use operator::{SimpleFunction, WitnessPair, WitnessProvider};
pub use pattern::{Cylinder, CylinderUnion, PatternSet};
pub use report::{ClaimReport, Verdict};

use num::BigRational;
use num::{BigInt, BigUint};
use num_traits::{One, Zero};

/// `1/2^e` as an exact rational.
pub fn pow2_inv(e: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(BigUint::one() << e as usize))
}

/// `2^e` as an exact big integer.
pub fn pow2(e: u64) -> BigUint {
    BigUint::one() << e as usize
}

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Default width tolerance for certified enclosures: 2^-40.
pub fn default_tol() -> BigRational {
    pow2_inv(40)
}

/// Default coordinate depth cap for tail-resolving sweeps.
pub const DEFAULT_DEPTH_CAP: usize = 4096;

/// Errors shared across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("zero has no cofinite-maximal digit representation")]
    NegOfZero,
    #[error("operands have mismatched cylinder depths: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("epsilon must lie strictly between 0 and 1")]
    EpsilonOutOfRange,
    #[error("no closed-form tail certificate available for this measure rule")]
    NoTailCertificate,
    #[error("witness provider found no admissible translate within budget")]
    ProviderFailure,
    #[error("witness certification failed: {0}")]
    CertificationFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

#[allow(unused)]
fn is_zero(r: &BigRational) -> bool {
    r.is_zero()
}
