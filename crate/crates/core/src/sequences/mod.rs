//! Integer sequence families `(n_k)` and their structural checks.
//!
//! Indices `k` are 1-based everywhere in the public API, matching the usual
//! `n_1, n_2, ...` notation; slices are accessed at `k - 1` internally.

mod block;
mod hlp;
mod io;
mod omega;
mod permute;
mod random;
mod term;

pub use block::{gen_block_sequence, BlockParams, BlockSequence, BlockVariant};
pub use hlp::{gen_hlp, gen_hlp_with, is_prime_u64};
pub use io::{read_sequence, write_sequence};
pub use omega::{OmegaKind, OmegaSchedule};
pub use permute::{permute_interleave, InterleavePermutation};
pub use random::{gen_random_omega, interval_bounds};
pub use term::Term;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    Geometric,
    ErdosFortet,
    Block,
    RandomOmega,
    Hlp,
    Custom,
}

impl FamilyTag {
    /// Families whose terms are strictly increasing by construction.
    pub fn is_monotone(self) -> bool {
        !matches!(self, FamilyTag::Custom)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::Geometric => "geometric",
            FamilyTag::ErdosFortet => "erdos_fortet",
            FamilyTag::Block => "block",
            FamilyTag::RandomOmega => "random_omega",
            FamilyTag::Hlp => "hlp",
            FamilyTag::Custom => "custom",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "geometric" => FamilyTag::Geometric,
            "erdos_fortet" | "erdos-fortet" => FamilyTag::ErdosFortet,
            "block" => FamilyTag::Block,
            "random_omega" | "random-omega" => FamilyTag::RandomOmega,
            "hlp" => FamilyTag::Hlp,
            "custom" => FamilyTag::Custom,
            other => return Err(Error::invalid(format!("unknown family '{other}'"))),
        })
    }
}

/// A finite prefix of distinct positive integers with provenance metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerSequence {
    terms: Vec<Term>,
    family: FamilyTag,
    params: Vec<(String, String)>,
    seed: Option<u64>,
}

impl IntegerSequence {
    pub fn new(
        terms: Vec<Term>,
        family: FamilyTag,
        params: Vec<(String, String)>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if family.is_monotone() {
            if let Some(k) = terms.windows(2).position(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "{family} sequence is not strictly increasing at k = {}",
                    k + 1
                )));
            }
        } else {
            let mut sorted: Vec<&Term> = terms.iter().collect();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("sequence terms must be pairwise distinct"));
            }
        }
        Ok(IntegerSequence {
            terms,
            family,
            params,
            seed,
        })
    }

    pub fn custom(terms: Vec<Term>) -> Result<Self> {
        Self::new(terms, FamilyTag::Custom, Vec::new(), None)
    }

    pub fn from_u64s(values: &[u64]) -> Result<Self> {
        let terms = values
            .iter()
            .map(|&v| Term::from_u64(v).ok_or_else(|| Error::invalid("sequence terms must be positive")))
            .collect::<Result<Vec<_>>>()?;
        Self::custom(terms)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn params(&self) -> &[(String, String)] {
        &self.params
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `n_k` for 1-based `k`.
    pub fn term(&self, k: usize) -> Result<&Term> {
        if k == 0 || k > self.terms.len() {
            return Err(Error::OutOfRange {
                index: k,
                len: self.terms.len(),
            });
        }
        Ok(&self.terms[k - 1])
    }

    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len > self.terms.len() {
            return Err(Error::OutOfRange {
                index: len,
                len: self.terms.len(),
            });
        }
        Ok(IntegerSequence {
            terms: self.terms[..len].to_vec(),
            family: self.family,
            params: self.params.clone(),
            seed: self.seed,
        })
    }

    /// The rearranged prefix `n_{perm[0]}, n_{perm[1]}, ...` (1-based `perm`
    /// entries) as a custom sequence.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let terms = perm
            .iter()
            .map(|&k| self.term(k).cloned())
            .collect::<Result<Vec<_>>>()?;
        Self::custom(terms)
    }

    /// 64-bit FNV-1a digest of the decimal terms; stable across platforms.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        for t in &self.terms {
            h.write(t.odd_part().to_string().as_bytes());
            h.write(b"<<");
            h.write(t.two_adic_shift().to_string().as_bytes());
            h.write(b"\n");
        }
        h.finish()
    }
}

pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf29ce484222325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

/// `n_k = base^k`, k = 1..=count.
pub fn gen_geometric(base: u64, count: usize) -> Result<IntegerSequence> {
    if base < 2 {
        return Err(Error::invalid(format!("geometric base must be >= 2, got {base}")));
    }
    if count == 0 {
        return Err(Error::invalid("count must be >= 1"));
    }
    let b = Term::from_u64(base).expect("base >= 2");
    let mut terms = Vec::with_capacity(count);
    let mut cur = b.clone();
    terms.push(cur.clone());
    for _ in 1..count {
        cur = if b.is_power_of_two() {
            Term::pow2(cur.two_adic_shift() + b.two_adic_shift())
        } else {
            Term::new(cur.to_biguint() * base).expect("nonzero")
        };
        terms.push(cur.clone());
    }
    IntegerSequence::new(
        terms,
        FamilyTag::Geometric,
        vec![("base".into(), base.to_string()), ("count".into(), count.to_string())],
        None,
    )
}

/// `n_k = 2^k - 1`, k = 1..=count.
pub fn gen_erdos_fortet(count: usize) -> Result<IntegerSequence> {
    if count == 0 {
        return Err(Error::invalid("count must be >= 1"));
    }
    let terms = (1..=count as u64)
        .map(|k| Term::new((BigUint::one() << k) - 1u32).expect("2^k - 1 > 0 for k >= 1"))
        .collect();
    IntegerSequence::new(
        terms,
        FamilyTag::ErdosFortet,
        vec![("count".into(), count.to_string())],
        None,
    )
}

/// First failing step of a gap check.
#[derive(Clone, Debug, PartialEq)]
pub struct GapViolation {
    /// 1-based index of the left term of the failing ratio `n_{k+1} / n_k`.
    pub k: usize,
    pub ratio: BigRational,
    pub required: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub passed: bool,
    pub first_violation: Option<GapViolation>,
}

/// Checks `n_{k+1} / n_k >= 1 + eps(k)` for all `k >= k0` in exact rational
/// arithmetic.
pub fn check_gap<F>(seq: &IntegerSequence, eps: F, k0: usize) -> GapReport
where
    F: Fn(usize) -> BigRational,
{
    let ints: Vec<BigInt> = seq.terms().iter().map(|t| BigInt::from(t.to_biguint())).collect();
    for k in k0.max(1)..ints.len() {
        let ratio = BigRational::new(ints[k].clone(), ints[k - 1].clone());
        let e = eps(k);
        let required = BigRational::one() + if e < BigRational::zero() { BigRational::zero() } else { e };
        if ratio < required {
            return GapReport {
                passed: false,
                first_violation: Some(GapViolation { k, ratio, required }),
            };
        }
    }
    GapReport {
        passed: true,
        first_violation: None,
    }
}

/// Asserts the [`IntegerSequence`] invariants; used by tests and the CLI.
pub fn assert_invariants(seq: &IntegerSequence) -> Result<()> {
    IntegerSequence::new(seq.terms.clone(), seq.family, Vec::new(), None).map(|_| ())
}
