//! Empirical distribution of `N^{-1/2} S_N(x)` over exactly reduced sample
//! points, with the usual distances and estimators.

mod estimators;
mod kernel;
mod lil;

use std::fmt;

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::periodic::{RationalPoint, TrigPolynomial};
use crate::sequences::{Fnv, IntegerSequence, Term};

pub use estimators::{
    empirical_cf, empirical_moment, excess_kurtosis, ks_distance, ks_fitted_normal, mean_and_variance, normal_cdf,
    variance_ratio,
};
pub use lil::{lil_ratio, lil_scan, LilScan};

use kernel::{DyadicPoint, TermKernel};

/// Default grid size for distribution tests (prime).
pub const DEFAULT_GRID: u64 = 100_003;

/// How the sample points `x_i` are chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampleSpec {
    /// `x_i = (i + p/q) / m`, `i = 0..m`, with `offset = (p, q)`, `0 <= p < q`.
    Grid { m: u64, offset: (u64, u64) },
    /// `x_i = U_i / 2^precision_bits` with `U_i` from ChaCha20 stream `i` of
    /// `seed`, most significant word first.
    Random { m: usize, precision_bits: u64, seed: u64 },
}

impl SampleSpec {
    /// Grid of `m` midpoints `(2i + 1) / (2m)`.
    pub fn grid(m: u64) -> Self {
        SampleSpec::Grid { m, offset: (1, 2) }
    }

    /// Random points with the smallest precision (a multiple of 64) that
    /// keeps 64 fractional bits of every `n_k x`.
    pub fn random_for(seq: &IntegerSequence, m: usize, seed: u64) -> Self {
        SampleSpec::Random {
            m,
            precision_bits: min_precision(seq.terms()),
            seed,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SampleSpec::Grid { m, .. } => *m as usize,
            SampleSpec::Random { m, .. } => *m,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for SampleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSpec::Grid { m, offset } => write!(f, "grid:{m}:{}/{}", offset.0, offset.1),
            SampleSpec::Random { m, precision_bits, seed } => write!(f, "random:{m}:{precision_bits}:{seed}"),
        }
    }
}

fn min_precision(terms: &[Term]) -> u64 {
    let bits = terms.iter().map(|t| t.bits()).max().unwrap_or(1);
    (bits + 64).div_ceil(64) * 64
}

/// The `i`-th point of a random-mode spec as an exact dyadic rational.
pub fn random_point(seed: u64, i: u64, precision_bits: u64) -> Result<RationalPoint> {
    if precision_bits == 0 || precision_bits % 64 != 0 {
        return Err(Error::invalid(format!(
            "precision must be a positive multiple of 64, got {precision_bits}"
        )));
    }
    let u = random_numerator(seed, i, precision_bits);
    RationalPoint::new(u, BigUint::from(1u8) << precision_bits as usize)
}

fn random_numerator(seed: u64, i: u64, precision_bits: u64) -> BigUint {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let words = (precision_bits / 64) as usize;
    // the first word drawn is the most significant one, so raising the
    // precision only appends bits
    let mut digits: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
    digits.reverse();
    let limbs: Vec<u32> = digits.iter().flat_map(|w| [*w as u32, (w >> 32) as u32]).collect();
    BigUint::new(limbs)
}

/// Normalized sums `N^{-1/2} S_N(x_i)` together with their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    n: usize,
    sequence_fingerprint: u64,
    permutation_fingerprint: Option<u64>,
    spec: SampleSpec,
}

impl EmpiricalSample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sequence_fingerprint(&self) -> u64 {
        self.sequence_fingerprint
    }

    pub fn permutation_fingerprint(&self) -> Option<u64> {
        self.permutation_fingerprint
    }

    pub fn spec(&self) -> &SampleSpec {
        &self.spec
    }
}

pub(crate) fn permutation_fingerprint(perm: &[usize]) -> u64 {
    let mut h = Fnv::new();
    for k in perm {
        h.write(&(*k as u64).to_le_bytes());
    }
    h.finish()
}

/// The terms `n_{pi(1)}, ..., n_{pi(N)}` (identity when `perm` is `None`).
pub(crate) fn selected_terms<'a>(seq: &'a IntegerSequence, perm: Option<&[usize]>, n: usize) -> Result<Vec<&'a Term>> {
    match perm {
        None => {
            if n > seq.len() {
                return Err(Error::OutOfRange { index: n, len: seq.len() });
            }
            Ok(seq.terms()[..n].iter().collect())
        }
        Some(p) => {
            if n > p.len() {
                return Err(Error::OutOfRange { index: n, len: p.len() });
            }
            p[..n].iter().map(|&k| seq.term(k)).collect()
        }
    }
}

/// Rejects grids on which some `f(n_k x)` degenerates: `m` must not divide
/// `j n_k` for any active harmonic `j`.
pub fn check_grid(f: &TrigPolynomial, terms: &[&Term], m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("grid size must be positive"));
    }
    for t in terms {
        let r = t.mod_u64(m);
        for j in f.active_harmonics() {
            if (j as u128 * r as u128) % m as u128 == 0 {
                return Err(Error::invalid(format!(
                    "grid size {m} divides {j} * n_k with n_k = {t}; choose a grid size (ideally prime) coprime to the frequencies"
                )));
            }
        }
    }
    Ok(())
}

/// `values[i] = N^{-1/2} sum_{k <= N} f(n_{pi(k)} x_i)`.
pub fn sample_sums(
    f: &TrigPolynomial,
    seq: &IntegerSequence,
    perm: Option<&[usize]>,
    n: usize,
    spec: &SampleSpec,
) -> Result<EmpiricalSample> {
    let terms = selected_terms(seq, perm, n)?;
    let scale = if n == 0 { 0.0 } else { 1.0 / (n as f64).sqrt() };
    let values = match *spec {
        SampleSpec::Grid { m, offset: (p, q) } => {
            if q == 0 || p >= q {
                return Err(Error::invalid(format!("grid offset {p}/{q} must lie in [0, 1)")));
            }
            check_grid(f, &terms, m)?;
            let v = m
                .checked_mul(q)
                .filter(|v| *v < 1 << 62)
                .ok_or_else(|| Error::invalid("grid size times offset denominator exceeds 2^62"))?;
            let residues: Vec<u64> = terms.iter().map(|t| t.mod_u64(v)).collect();
            (0..m)
                .into_par_iter()
                .map(|i| {
                    let u = q * i + p;
                    let s: f64 = residues
                        .iter()
                        .map(|&r| f.eval_residue((r as u128 * u as u128 % v as u128) as u64, v))
                        .sum();
                    s * scale
                })
                .collect()
        }
        SampleSpec::Random {
            m,
            precision_bits,
            seed,
        } => {
            let need = terms.iter().map(|t| t.bits()).max().unwrap_or(0) + 64;
            if precision_bits < need || precision_bits % 64 != 0 {
                return Err(Error::invalid(format!(
                    "precision {precision_bits} must be a multiple of 64 and at least {need}"
                )));
            }
            let kernels: Vec<TermKernel> = terms.iter().map(|t| TermKernel::new(t)).collect();
            (0..m as u64)
                .into_par_iter()
                .map(|i| {
                    let x = DyadicPoint::new(&random_numerator(seed, i, precision_bits), precision_bits);
                    let s: f64 = kernels.iter().map(|k| x.eval(f, k)).sum();
                    s * scale
                })
                .collect()
        }
    };
    Ok(EmpiricalSample {
        values,
        n,
        sequence_fingerprint: seq.fingerprint(),
        permutation_fingerprint: perm.map(|p| permutation_fingerprint(&p[..n])),
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests;
