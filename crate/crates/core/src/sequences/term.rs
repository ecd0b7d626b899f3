use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A positive integer stored as `odd * 2^shift`.
///
/// Lacunary sequences are dominated by huge powers of two (`2^k`, `j * 2^s`);
/// keeping the two-adic part as a plain exponent keeps a prefix of `2^k` for
/// `k <= 65536` in a few hundred kilobytes instead of gigabytes, and lets the
/// phase kernels skip straight to the relevant window of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    odd: BigUint,
    shift: u64,
}

impl Term {
    pub fn new(value: BigUint) -> Option<Self> {
        if value.is_zero() {
            return None;
        }
        let shift = value.trailing_zeros().unwrap_or(0);
        Some(Term {
            odd: value >> shift,
            shift,
        })
    }

    pub fn from_u64(value: u64) -> Option<Self> {
        Self::new(BigUint::from(value))
    }

    pub fn pow2(exp: u64) -> Self {
        Term {
            odd: BigUint::one(),
            shift: exp,
        }
    }

    pub fn odd_part(&self) -> &BigUint {
        &self.odd
    }

    pub fn two_adic_shift(&self) -> u64 {
        self.shift
    }

    pub fn bits(&self) -> u64 {
        self.odd.bits() + self.shift
    }

    pub fn is_power_of_two(&self) -> bool {
        self.odd.is_one()
    }

    pub fn to_biguint(&self) -> BigUint {
        &self.odd << self.shift
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.bits() > 64 {
            return None;
        }
        self.to_biguint().to_u64()
    }

    /// `self * factor` for a small positive factor.
    pub fn mul_small(&self, factor: u64) -> Term {
        assert!(factor > 0, "factor must be positive");
        let tz = factor.trailing_zeros() as u64;
        Term {
            odd: &self.odd * (factor >> tz),
            shift: self.shift + tz,
        }
    }

    /// Residue of the term modulo `m` (m >= 1), computed without
    /// materialising the full integer.
    pub fn mod_u64(&self, m: u64) -> u64 {
        assert!(m > 0, "modulus must be positive");
        if m == 1 {
            return 0;
        }
        let odd = (&self.odd % m).to_u64().unwrap_or(0);
        let pow = BigUint::from(2u32)
            .modpow(&BigUint::from(self.shift), &BigUint::from(m))
            .to_u64()
            .unwrap_or(0);
        ((odd as u128 * pow as u128) % m as u128) as u64
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits()
            .cmp(&other.bits())
            .then_with(|| self.to_biguint().cmp(&other.to_biguint()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let value = BigUint::from_str(s.trim())
            .map_err(|e| Error::invalid(format!("not a decimal integer '{s}': {e}")))?;
        Term::new(value).ok_or_else(|| Error::invalid("sequence terms must be positive"))
    }
}
