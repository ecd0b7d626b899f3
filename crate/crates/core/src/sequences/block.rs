use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{FamilyTag, IntegerSequence, Term};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockVariant {
    Clt,
    Lil,
}

impl fmt::Display for BlockVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockVariant::Clt => "clt",
            BlockVariant::Lil => "lil",
        })
    }
}

impl FromStr for BlockVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clt" => Ok(BlockVariant::Clt),
            "lil" => Ok(BlockVariant::Lil),
            other => Err(Error::invalid(format!("unknown block variant '{other}'"))),
        }
    }
}

/// Blocks `I_k = {m_k, 2 m_k, ..., r_k m_k}`, k = 1..=count.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockParams {
    pub variant: BlockVariant,
    pub m: Vec<Term>,
    pub r: Vec<u64>,
}

/// Admissible `r_k` for the lil variant: `k ln k` up to a factor of two.
pub(crate) fn lil_r_envelope(k: usize) -> (u64, u64) {
    let kl = k as f64 * (k as f64).ln();
    let lo = ((kl / 2.0).floor() as u64).max(1);
    let hi = ((2.0 * kl).ceil() as u64).max(1);
    (lo, hi)
}

fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

impl BlockParams {
    pub fn new(variant: BlockVariant, m: Vec<Term>, r: Vec<u64>) -> Result<Self> {
        let p = BlockParams { variant, m, r };
        p.validate()?;
        Ok(p)
    }

    pub fn count(&self) -> usize {
        self.m.len()
    }

    /// Smallest admissible clt bases for the given block lengths:
    /// `m_1 = 2`, `m_{k+1} = 2^{k^2} m_k`.
    pub fn clt_minimal(r: Vec<u64>) -> Result<Self> {
        let mut m = Vec::with_capacity(r.len());
        let mut shift = 1u64;
        for k in 1..=r.len() as u64 {
            m.push(Term::pow2(shift));
            shift += k * k;
        }
        Self::new(BlockVariant::Clt, m, r)
    }

    /// Lil blocks with `r_k = max(1, round(k ln k))` and the smallest
    /// power-of-two bases satisfying `m_{k+1} >= r_k 4^k m_k`.
    pub fn lil_minimal(count: usize) -> Result<Self> {
        let r: Vec<u64> = (1..=count)
            .map(|k| ((k as f64 * (k as f64).ln()).round() as u64).max(1))
            .collect();
        Self::lil_with_r(r)
    }

    pub fn lil_with_r(r: Vec<u64>) -> Result<Self> {
        let mut m = Vec::with_capacity(r.len());
        let mut shift = 1u64;
        for (i, &rk) in r.iter().enumerate() {
            m.push(Term::pow2(shift));
            shift += ceil_log2(rk) + 2 * (i as u64 + 1);
        }
        Self::new(BlockVariant::Lil, m, r)
    }

    pub fn validate(&self) -> Result<()> {
        let count = self.m.len();
        if count == 0 {
            return Err(Error::invalid("block parameters need at least one block"));
        }
        if self.r.len() != count {
            return Err(Error::invalid(format!(
                "m has {} entries but r has {}",
                count,
                self.r.len()
            )));
        }
        for k in 1..=count {
            let mk = &self.m[k - 1];
            let rk = self.r[k - 1];
            if !mk.is_power_of_two() {
                return Err(Error::invalid(format!("m_{k} = {mk} is not a power of two")));
            }
            if rk == 0 {
                return Err(Error::invalid(format!("r_{k} must be >= 1")));
            }
            match self.variant {
                BlockVariant::Clt => {
                    let cap = (k as u64).saturating_mul(k as u64);
                    if rk > cap {
                        return Err(Error::invalid(format!("r_{k} = {rk} exceeds k^2 = {cap}")));
                    }
                }
                BlockVariant::Lil => {
                    let (lo, hi) = lil_r_envelope(k);
                    if rk < lo || rk > hi {
                        return Err(Error::invalid(format!(
                            "r_{k} = {rk} outside the k log k envelope [{lo}, {hi}]"
                        )));
                    }
                }
            }
            if k < count {
                let s0 = mk.two_adic_shift();
                let s1 = self.m[k].two_adic_shift();
                let ok = match self.variant {
                    BlockVariant::Clt => s1 >= s0 && s1 - s0 >= (k as u64) * (k as u64),
                    // m_{k+1} >= r_k 2^{2k} m_k  <=>  2^{s1 - s0 - 2k} >= r_k
                    BlockVariant::Lil => {
                        let need = s0 + 2 * k as u64;
                        s1 >= need && (s1 - need >= 64 || (1u128 << (s1 - need)) >= rk as u128)
                    }
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "growth constraint violated between blocks k = {k} and k = {}",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A generated block sequence together with its block layout.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSequence {
    pub sequence: IntegerSequence,
    /// 1-based index of the first term of each block.
    pub block_starts: Vec<usize>,
    pub params: BlockParams,
}

impl BlockSequence {
    /// 1-based block number containing the 1-based term index `k`.
    pub fn block_of(&self, k: usize) -> Option<usize> {
        if k == 0 || k > self.sequence.len() {
            return None;
        }
        Some(self.block_starts.partition_point(|&s| s <= k))
    }

    /// `eps_k = 1 / r_j` when `n_k` and `n_{k+1}` share block `j`, else 0.
    pub fn within_block_eps(&self, k: usize) -> BigRational {
        match (self.block_of(k), self.block_of(k + 1)) {
            (Some(a), Some(b)) if a == b => {
                BigRational::new(BigInt::from(1), BigInt::from(self.params.r[a - 1]))
            }
            _ => BigRational::zero(),
        }
    }

    /// Indices of the subsequence taking the first `min(take(j), r_j)` terms of
    /// every block `j`.
    pub fn subsequence_indices<F: Fn(usize) -> u64>(&self, take: F) -> Vec<usize> {
        let mut out = Vec::new();
        for (j0, &start) in self.block_starts.iter().enumerate() {
            let n = take(j0 + 1).min(self.params.r[j0]) as usize;
            out.extend(start..start + n);
        }
        out
    }

    /// The subsequence with `r_k ~ k`: the first `k` terms of block `k`.
    pub fn linear_subsequence_indices(&self) -> Vec<usize> {
        self.subsequence_indices(|j| j as u64)
    }
}

pub fn gen_block_sequence(params: BlockParams) -> Result<BlockSequence> {
    params.validate()?;
    let mut terms = Vec::new();
    let mut block_starts = Vec::with_capacity(params.count());
    for (mk, &rk) in params.m.iter().zip(&params.r) {
        block_starts.push(terms.len() + 1);
        for j in 1..=rk {
            terms.push(mk.mul_small(j));
        }
    }
    let m_desc: Vec<String> = params
        .m
        .iter()
        .map(|t| format!("2^{}", t.two_adic_shift()))
        .collect();
    let r_desc: Vec<String> = params.r.iter().map(|r| r.to_string()).collect();
    let meta = vec![
        ("variant".to_string(), params.variant.to_string()),
        ("m".to_string(), m_desc.join(",")),
        ("r".to_string(), r_desc.join(",")),
    ];
    let sequence = IntegerSequence::new(terms, FamilyTag::Block, meta, None)?;
    Ok(BlockSequence {
        sequence,
        block_starts,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::check_gap;

    fn terms(v: &[u64]) -> Vec<Term> {
        v.iter().map(|&x| Term::from_u64(x).unwrap()).collect()
    }

    fn vals(b: &BlockSequence) -> Vec<u64> {
        b.sequence.terms().iter().map(|t| t.to_u64().unwrap()).collect()
    }

    #[test]
    fn small_examples() {
        let p = BlockParams::new(BlockVariant::Clt, terms(&[2, 8]), vec![1, 4]).unwrap();
        let b = gen_block_sequence(p).unwrap();
        assert_eq!(vals(&b), vec![2, 8, 16, 24, 32]);
        assert_eq!(b.block_starts, vec![1, 2]);

        let p = BlockParams::new(BlockVariant::Clt, terms(&[2]), vec![1]).unwrap();
        assert_eq!(vals(&gen_block_sequence(p).unwrap()), vec![2]);

        let p = BlockParams::new(BlockVariant::Lil, terms(&[2, 512]), vec![1, 2]).unwrap();
        assert_eq!(vals(&gen_block_sequence(p).unwrap()), vec![2, 512, 1024]);
    }

    #[test]
    fn rejects_bad_parameters() {
        // 4/2 = 2 >= 2^1 is fine, 8/4 = 2 < 2^4 is not
        let e = BlockParams::new(BlockVariant::Clt, terms(&[2, 4, 8]), vec![1, 1, 1]).unwrap_err();
        assert!(e.to_string().contains("k = 2"), "{e}");
        assert!(BlockParams::new(BlockVariant::Clt, terms(&[3]), vec![1]).is_err());
        assert!(BlockParams::new(BlockVariant::Clt, terms(&[2, 8]), vec![2, 1]).is_err());
        assert!(BlockParams::new(BlockVariant::Lil, terms(&[2, 4]), vec![1, 2]).is_err());
        assert!(BlockParams::new(BlockVariant::Lil, terms(&[2, 512]), vec![1, 9]).is_err());
    }

    #[test]
    fn minimal_params_are_valid_and_gap_checked() {
        for b in [
            gen_block_sequence(BlockParams::clt_minimal((1..=12).collect()).unwrap()).unwrap(),
            gen_block_sequence(BlockParams::lil_minimal(15).unwrap()).unwrap(),
        ] {
            let report = check_gap(&b.sequence, |k| b.within_block_eps(k), 1);
            assert!(report.passed, "{:?}", report.first_violation);
        }
    }

    #[test]
    fn subsequence_layout() {
        let b = gen_block_sequence(BlockParams::clt_minimal(vec![1, 4, 9]).unwrap()).unwrap();
        assert_eq!(b.block_starts, vec![1, 2, 6]);
        assert_eq!(b.linear_subsequence_indices(), vec![1, 2, 3, 6, 7, 8]);
        assert_eq!(b.block_of(5), Some(2));
        assert_eq!(b.block_of(6), Some(3));
        assert_eq!(b.block_of(15), None);
    }
}
