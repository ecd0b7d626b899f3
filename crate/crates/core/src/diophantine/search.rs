use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sequences::{IntegerSequence, OmegaSchedule};

/// Default cap on enumerated partial sums for a single search.
pub const DEFAULT_WORK_BUDGET: u64 = 400_000_000;

const P61: u64 = (1u64 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    let prod = a as u128 * b as u128;
    let lo = (prod as u64) & P61;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
fn coeff_mod(c: i64) -> u64 {
    if c >= 0 {
        c as u64 % P61
    } else {
        P61 - ((-c) as u64 % P61)
    }
}

/// Search box for `a_1 n_{k_1} + ... + a_r n_{k_r} = 0` with distinct indices
/// in `1..=k_max` and `1 <= |a_i| <= coeff_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophantineQuery {
    pub r: usize,
    pub coeff_bound: u64,
    pub k_max: usize,
    pub work_budget: u64,
}

impl DiophantineQuery {
    pub fn new(r: usize, coeff_bound: u64, k_max: usize) -> Self {
        DiophantineQuery {
            r,
            coeff_bound,
            k_max,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.work_budget = budget;
        self
    }

    /// Number of partial sums the meet-in-the-middle search enumerates.
    pub fn work_estimate(&self) -> u64 {
        let a = self.r / 2;
        let b = self.r - a;
        let k = self.k_max as u128;
        let two_a = 2 * self.coeff_bound as u128;
        let left = binom(k, a as u128)
            .saturating_mul(self.coeff_bound as u128)
            .saturating_mul(sat_pow(two_a, a.saturating_sub(1) as u32));
        let right = binom(k, b as u128).saturating_mul(sat_pow(two_a, b as u32));
        left.saturating_add(right).min(u64::MAX as u128) as u64
    }
}

fn sat_pow(b: u128, e: u32) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(b))
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// A relation `sum_i coeffs[i] * n_{indices[i]} = 0`; indices are 1-based and
/// increasing, the first coefficient is positive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiophantineSolution {
    pub indices: Vec<usize>,
    pub coeffs: Vec<i64>,
}

impl DiophantineSolution {
    pub fn elements(&self, seq: &IntegerSequence) -> Vec<BigUint> {
        self.indices
            .iter()
            .map(|&k| seq.terms()[k - 1].to_biguint())
            .collect()
    }

    /// Exact re-check of the relation.
    pub fn verify(&self, seq: &IntegerSequence) -> bool {
        if self.indices.iter().any(|&k| k == 0 || k > seq.len()) {
            return false;
        }
        let total: BigInt = self
            .indices
            .iter()
            .zip(&self.coeffs)
            .map(|(&k, &c)| BigInt::from(seq.terms()[k - 1].to_biguint()) * c)
            .sum();
        total.is_zero()
    }
}

impl fmt::Display for DiophantineSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (&k, &c)) in self.indices.iter().zip(&self.coeffs).enumerate() {
            let mag = c.unsigned_abs();
            match (i, c < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag != 1 {
                write!(f, "{mag} ")?;
            }
            write!(f, "n_{k}")?;
        }
        f.write_str(" = 0")
    }
}

struct Half {
    width: usize,
    fps: Vec<u64>,
    idx: Vec<u32>,
    coeffs: Vec<i64>,
}

struct Enum<'a> {
    fps: &'a [u64],
    end: usize,
    bound: i64,
    first_positive: bool,
    idx: Vec<u32>,
    co: Vec<i64>,
}

impl Enum<'_> {
    /// Extends the current prefix by `left` more increasing positions from
    /// `from..end`, emitting `(fingerprint, indices, coeffs)` for each
    /// completion. With `first_positive` the first coefficient overall is
    /// restricted to `1..=bound`.
    fn run<F: FnMut(u64, &[u32], &[i64])>(&mut self, from: usize, left: usize, acc: u64, emit: &mut F) {
        if left == 0 {
            emit(acc, &self.idx, &self.co);
            return;
        }
        if self.end < from + left {
            return;
        }
        for pos in from..=self.end - left {
            self.idx.push(pos as u32);
            let lo = if self.first_positive && self.idx.len() == 1 { 1 } else { -self.bound };
            for c in lo..=self.bound {
                if c == 0 {
                    continue;
                }
                self.co.push(c);
                let term = mulmod(coeff_mod(c), self.fps[pos]);
                self.run(pos + 1, left - 1, addmod(acc, term), emit);
                self.co.pop();
            }
            self.idx.pop();
        }
    }
}

/// All canonical solutions of the query on the prefix `n_1..n_{k_max}`.
///
/// Meet in the middle: the first `floor(r/2)` indices of a solution form the
/// left half (first coefficient positive), the rest the right half, matched
/// on `-sum` modulo `2^61 - 1`; every match is re-verified exactly.
pub fn count_solutions(seq: &IntegerSequence, query: &DiophantineQuery) -> Result<Vec<DiophantineSolution>> {
    let DiophantineQuery { r, coeff_bound, k_max, work_budget } = *query;
    if r < 2 {
        return Err(Error::invalid("r must be >= 2"));
    }
    if coeff_bound < 1 || coeff_bound > i64::MAX as u64 / 2 {
        return Err(Error::invalid("coefficient bound must be in 1..2^62"));
    }
    if k_max > seq.len() {
        return Err(Error::OutOfRange { index: k_max, len: seq.len() });
    }
    if k_max < r {
        return Ok(Vec::new());
    }
    let required = query.work_estimate();
    if required > work_budget {
        return Err(Error::WorkBudgetExceeded { budget: work_budget, required });
    }
    let bound = coeff_bound as i64;
    let fps: Vec<u64> = seq.terms()[..k_max].iter().map(|t| t.mod_u64(P61)).collect();
    let exact: Vec<BigInt> = seq.terms()[..k_max]
        .iter()
        .map(|t| BigInt::from(t.to_biguint()))
        .collect();

    let a = r / 2;
    let b = r - a;
    let mut left = Half { width: a, fps: Vec::new(), idx: Vec::new(), coeffs: Vec::new() };
    Enum { fps: &fps, end: k_max, bound, first_positive: true, idx: Vec::new(), co: Vec::new() }.run(
        0,
        a,
        0,
        &mut |fp, idx, co| {
            left.fps.push(fp);
            left.idx.extend_from_slice(idx);
            left.coeffs.extend_from_slice(co);
        },
    );
    let mut order: Vec<u32> = (0..left.fps.len() as u32).collect();
    order.sort_by_key(|&i| (left.fps[i as usize], i));
    let sorted_fps: Vec<u64> = order.iter().map(|&i| left.fps[i as usize]).collect();

    let per_first: Vec<Vec<DiophantineSolution>> = (a..k_max)
        .into_par_iter()
        .map(|j1| {
            let mut found = Vec::new();
            let mut emit = |fp: u64, ridx: &[u32], rco: &[i64]| {
                let want = if fp == 0 { 0 } else { P61 - fp };
                let lo = sorted_fps.partition_point(|&x| x < want);
                for (off, &x) in sorted_fps[lo..].iter().enumerate() {
                    if x != want {
                        break;
                    }
                    let e = order[lo + off] as usize;
                    let lidx = &left.idx[e * left.width..(e + 1) * left.width];
                    if *lidx.last().expect("a >= 1") as usize >= j1 {
                        continue;
                    }
                    let lco = &left.coeffs[e * left.width..(e + 1) * left.width];
                    let total: BigInt = lidx
                        .iter()
                        .chain(ridx)
                        .zip(lco.iter().chain(rco))
                        .map(|(&k, &c)| &exact[k as usize] * c)
                        .sum();
                    if total.is_zero() {
                        found.push(DiophantineSolution {
                            indices: lidx.iter().chain(ridx).map(|&k| k as usize + 1).collect(),
                            coeffs: lco.iter().chain(rco).copied().collect(),
                        });
                    }
                }
            };
            // right halves whose smallest index is exactly j1
            let mut en = Enum { fps: &fps, end: k_max, bound, first_positive: false, idx: vec![j1 as u32], co: vec![0] };
            for c in -bound..=bound {
                if c == 0 {
                    continue;
                }
                en.co[0] = c;
                en.run(j1 + 1, b - 1, mulmod(coeff_mod(c), fps[j1]), &mut emit);
            }
            found.sort();
            found
        })
        .collect();
    let mut out: Vec<DiophantineSolution> = per_first.into_iter().flatten().collect();
    out.sort();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AomegaOutcome {
    Pass,
    Fail,
    PassWithinCaps,
}

impl fmt::Display for AomegaOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AomegaOutcome::Pass => "pass",
            AomegaOutcome::Fail => "fail",
            AomegaOutcome::PassWithinCaps => "pass-within-caps",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AomegaVerdict {
    pub level: usize,
    pub omega_n: f64,
    /// `(r, A)` actually searched.
    pub caps: (usize, u64),
    /// `(floor(omega_N), floor(N^omega_N))`; the coefficient bound is `None`
    /// when it does not fit in 64 bits.
    pub theoretical: (usize, Option<u64>),
    pub outcome: AomegaOutcome,
    pub witness: Option<DiophantineSolution>,
    /// 1-based indices of the `N` smallest elements, ascending by index.
    pub smallest_n_set: Vec<usize>,
}

fn theoretical_coeff_bound(n: usize, omega_n: f64) -> Option<u64> {
    if omega_n.fract() == 0.0 && omega_n >= 0.0 && omega_n < 64.0 {
        return (n as u64).checked_pow(omega_n as u32);
    }
    let log2 = omega_n * (n as f64).log2();
    if log2 >= 63.0 {
        return None;
    }
    Some((n as f64).powf(omega_n).floor() as u64)
}

/// Decides Condition A_omega at level `N` inside the caps `(r_max, A_max)`.
///
/// A relation violates the condition when it involves an element outside the
/// `N` smallest ones. Among violations the reported witness minimises, in
/// order: the number of its elements inside the `N` smallest set, the number
/// of terms, and the relation written with its elements in increasing value.
pub fn check_a_omega(
    seq: &IntegerSequence,
    omega: &OmegaSchedule,
    level: usize,
    caps: (usize, u64),
    work_budget: u64,
) -> Result<AomegaVerdict> {
    let k = seq.len();
    if level == 0 || level > k {
        return Err(Error::invalid(format!("level N = {level} must lie in 1..={k}")));
    }
    let omega_n = omega.eval(level);
    if !(omega_n > 0.0 && omega_n.is_finite()) {
        return Err(Error::invalid(format!("omega_{level} = {omega_n} is not positive")));
    }
    let r_th = omega_n.floor().min(usize::MAX as f64) as usize;
    let a_th = theoretical_coeff_bound(level, omega_n);
    let r_hi = r_th.min(caps.0);
    let a_hi = match a_th {
        Some(a) => a.min(caps.1),
        None => caps.1,
    };

    let mut by_value: Vec<usize> = (1..=k).collect();
    by_value.sort_by(|&x, &y| seq.terms()[x - 1].cmp(&seq.terms()[y - 1]));
    let mut smallest: Vec<usize> = by_value[..level].to_vec();
    smallest.sort_unstable();
    let small_set: BTreeSet<usize> = smallest.iter().copied().collect();

    let full_box = r_hi == r_th && a_th == Some(a_hi);
    let mut verdict = AomegaVerdict {
        level,
        omega_n,
        caps: (r_hi, a_hi),
        theoretical: (r_th, a_th),
        outcome: if full_box { AomegaOutcome::Pass } else { AomegaOutcome::PassWithinCaps },
        witness: None,
        smallest_n_set: smallest,
    };
    if level == k {
        verdict.outcome = AomegaOutcome::Pass;
        return Ok(verdict);
    }
    if a_hi == 0 {
        return Ok(verdict);
    }

    let mut best: Option<(WitnessKey, DiophantineSolution)> = None;
    for r in 2..=r_hi {
        let query = DiophantineQuery::new(r, a_hi, k).with_budget(work_budget);
        for sol in count_solutions(seq, &query)? {
            if sol.indices.iter().all(|i| small_set.contains(i)) {
                continue;
            }
            let key = witness_key(seq, &sol, &small_set);
            if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
                best = Some((key, sol));
            }
        }
    }
    if let Some((_, w)) = best {
        verdict.outcome = AomegaOutcome::Fail;
        verdict.witness = Some(w);
    }
    Ok(verdict)
}

type WitnessKey = (usize, usize, Vec<(BigUint, i64)>);

fn witness_key(seq: &IntegerSequence, sol: &DiophantineSolution, small: &BTreeSet<usize>) -> WitnessKey {
    let inside = sol.indices.iter().filter(|i| small.contains(i)).count();
    let mut terms: Vec<(BigUint, i64)> = sol
        .indices
        .iter()
        .zip(&sol.coeffs)
        .map(|(&i, &c)| (seq.terms()[i - 1].to_biguint(), c))
        .collect();
    terms.sort();
    if terms[0].1 < 0 {
        for t in &mut terms {
            t.1 = -t.1;
        }
    }
    (inside, sol.indices.len(), terms)
}

/// The relation with its elements spelled out, e.g. `2*64 - 1*128 = 0`.
pub fn witness_summary(seq: &IntegerSequence, sol: &DiophantineSolution) -> String {
    let mut out = String::new();
    for (i, (v, c)) in sol.elements(seq).iter().zip(&sol.coeffs).enumerate() {
        if i == 0 {
            out.push_str(&format!("{c}*{v}"));
        } else if *c < 0 {
            out.push_str(&format!(" - {}*{v}", c.unsigned_abs()));
        } else {
            out.push_str(&format!(" + {c}*{v}"));
        }
    }
    out.push_str(" = 0");
    out
}
