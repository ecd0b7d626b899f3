use std::collections::HashMap;
use std::hash::{BuildHasherDefault, DefaultHasher, Hash};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::periodic::TrigPolynomial;
use crate::sequences::{IntegerSequence, Term};

/// Default cap on coefficient products formed while expanding powers.
pub const DEFAULT_MOMENT_BUDGET: u64 = 200_000_000;

type FixedState = BuildHasherDefault<DefaultHasher>;

/// Exponent keys of a [`FrequencyPolynomial`].
pub trait Exponent: Clone + Ord + Hash + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_bigint(v: &BigInt) -> Option<Self>;
}

impl Exponent for i128 {
    fn zero() -> Self {
        0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
}

impl Exponent for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
}

/// Sparse Laurent polynomial `sum_e c_e z^e` in `z = exp(2 pi i x)`, stored
/// sorted by exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyPolynomial<K: Exponent = BigInt> {
    terms: Vec<(K, Complex64)>,
}

impl<K: Exponent> FrequencyPolynomial<K> {
    pub fn one() -> Self {
        FrequencyPolynomial {
            terms: vec![(K::zero(), Complex64::new(1.0, 0.0))],
        }
    }

    /// `sum_{k in terms} f(n_k x)` written in characters:
    /// `a_j cos + b_j sin` contributes `(a_j - i b_j)/2` at `+j n_k` and
    /// `(a_j + i b_j)/2` at `-j n_k`.
    pub fn from_sum(f: &TrigPolynomial, terms: &[&Term]) -> Result<Self> {
        let mut acc: HashMap<K, (NeumaierSum, NeumaierSum), FixedState> = HashMap::default();
        for t in terms {
            let n = BigInt::from(t.to_biguint());
            for j in f.active_harmonics() {
                let (a, b) = (f.cos_coeff(j), f.sin_coeff(j));
                let e = &n * j;
                for (exp, c) in [(e.clone(), Complex64::new(a / 2.0, -b / 2.0)), (-e, Complex64::new(a / 2.0, b / 2.0))] {
                    let key = K::from_bigint(&exp)
                        .ok_or_else(|| Error::invalid("exponent does not fit the chosen key type"))?;
                    let slot = acc.entry(key).or_default();
                    slot.0.add(c.re);
                    slot.1.add(c.im);
                }
            }
        }
        Ok(Self::from_accumulator(acc))
    }

    fn from_accumulator(acc: HashMap<K, (NeumaierSum, NeumaierSum), FixedState>) -> Self {
        let mut terms: Vec<(K, Complex64)> = acc
            .into_iter()
            .map(|(k, (re, im))| (k, Complex64::new(re.value(), im.value())))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        FrequencyPolynomial { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(K, Complex64)] {
        &self.terms
    }

    pub fn coeff(&self, e: &K) -> Complex64 {
        match self.terms.binary_search_by(|(k, _)| k.cmp(e)) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Product; accumulation per exponent is compensated and visits the
    /// operands in sorted order, so the result is deterministic.
    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: HashMap<K, (NeumaierSum, NeumaierSum), FixedState> = HashMap::default();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let c = c1 * c2;
                let slot = acc.entry(e1.add(e2)).or_default();
                slot.0.add(c.re);
                slot.1.add(c.im);
            }
        }
        Self::from_accumulator(acc)
    }

    /// Constant term of `self * other`, i.e. `sum_e self(e) other(-e)`.
    pub fn constant_term_of_product(&self, other: &Self) -> Complex64 {
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for (e, c) in &self.terms {
            let d = other.coeff(&e.neg());
            if d != Complex64::new(0.0, 0.0) {
                let p = c * d;
                re.add(p.re);
                im.add(p.im);
            }
        }
        Complex64::new(re.value(), im.value())
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&K::zero())
    }
}

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn charge(&mut self, units: u64) -> Result<()> {
        self.used = self.used.saturating_add(units);
        if self.used > self.limit {
            return Err(Error::WorkBudgetExceeded {
                budget: self.limit,
                required: self.used,
            });
        }
        Ok(())
    }
}

/// `P^p` by repeated multiplication, returning `(P^ceil(p/2), P^floor(p/2))`.
fn half_powers<K: Exponent>(
    p_poly: &FrequencyPolynomial<K>,
    p: u32,
    budget: &mut Budget,
) -> Result<(FrequencyPolynomial<K>, FrequencyPolynomial<K>)> {
    let hi = p.div_ceil(2);
    let lo = p / 2;
    let mut cur = FrequencyPolynomial::one();
    let mut low = FrequencyPolynomial::one();
    for step in 1..=hi {
        budget.charge((cur.len() as u64).saturating_mul(p_poly.len() as u64))?;
        cur = if step == 1 { p_poly.clone() } else { cur.mul(p_poly) };
        if step == lo {
            low = cur.clone();
        }
    }
    Ok((cur, low))
}

fn power<K: Exponent>(p_poly: &FrequencyPolynomial<K>, p: u32, budget: &mut Budget) -> Result<FrequencyPolynomial<K>> {
    let mut cur = FrequencyPolynomial::one();
    for step in 1..=p {
        budget.charge((cur.len() as u64).saturating_mul(p_poly.len() as u64))?;
        cur = if step == 1 { p_poly.clone() } else { cur.mul(p_poly) };
    }
    Ok(cur)
}

/// Whether `max_exponent * span` fits comfortably in `i128` arithmetic.
fn fits_i128(f: &TrigPolynomial, terms: &[&Term], span: u32) -> bool {
    let max_bits = terms.iter().map(|t| t.bits()).max().unwrap_or(0);
    let d_bits = 64 - (f.degree() as u64).leading_zeros() as u64;
    let p_bits = 32 - span.leading_zeros() as u64;
    max_bits + d_bits + p_bits + 2 < 126
}

fn ct_power<K: Exponent>(f: &TrigPolynomial, terms: &[&Term], p: u32, budget: u64) -> Result<f64> {
    let poly = FrequencyPolynomial::<K>::from_sum(f, terms)?;
    let mut b = Budget { limit: budget, used: 0 };
    let (hi, lo) = half_powers(&poly, p, &mut b)?;
    b.charge(hi.len() as u64)?;
    Ok(hi.constant_term_of_product(&lo).re)
}

/// `int_0^1 S_N(x)^p dx` as the constant term of `P^p`, with
/// `P = sum_{k <= N} f(n_k x)` in characters.
pub fn moment_exact(f: &TrigPolynomial, seq: &IntegerSequence, n: usize, p: u32) -> Result<f64> {
    moment_exact_with_budget(f, seq, n, p, DEFAULT_MOMENT_BUDGET)
}

pub fn moment_exact_with_budget(
    f: &TrigPolynomial,
    seq: &IntegerSequence,
    n: usize,
    p: u32,
    budget: u64,
) -> Result<f64> {
    if p == 0 {
        return Ok(1.0);
    }
    if n > seq.len() {
        return Err(Error::OutOfRange { index: n, len: seq.len() });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let terms: Vec<&Term> = seq.terms()[..n].iter().collect();
    if fits_i128(f, &terms, p) {
        ct_power::<i128>(f, &terms, p, budget)
    } else {
        ct_power::<BigInt>(f, &terms, p, budget)
    }
}

fn block_terms<'a>(seq: &'a IntegerSequence, block: &[usize]) -> Result<Vec<&'a Term>> {
    block.iter().map(|&k| seq.term(k)).collect()
}

fn ct_mixed<K: Exponent>(
    f: &TrigPolynomial,
    tm: &[&Term],
    tn: &[&Term],
    p: u32,
    q: u32,
    budget: u64,
) -> Result<f64> {
    let mut b = Budget { limit: budget, used: 0 };
    let pm = power(&FrequencyPolynomial::<K>::from_sum(f, tm)?, p, &mut b)?;
    let pn = power(&FrequencyPolynomial::<K>::from_sum(f, tn)?, q, &mut b)?;
    b.charge(pm.len() as u64)?;
    Ok(pm.constant_term_of_product(&pn).re)
}

/// `int_0^1 Z_M^p Z_N^q dx` for the block sums `Z_B = sum_{k in B} f(n_k x)`
/// over disjoint 1-based index sets.
pub fn moment_mixed(
    f: &TrigPolynomial,
    seq: &IntegerSequence,
    block_m: &[usize],
    block_n: &[usize],
    p: u32,
    q: u32,
) -> Result<f64> {
    if let Some(k) = block_m.iter().find(|k| block_n.contains(k)) {
        return Err(Error::invalid(format!("blocks overlap at index {k}")));
    }
    let tm = block_terms(seq, block_m)?;
    let tn = block_terms(seq, block_n)?;
    let all: Vec<&Term> = tm.iter().chain(tn.iter()).copied().collect();
    if fits_i128(f, &all, p + q) {
        ct_mixed::<i128>(f, &tm, &tn, p, q, DEFAULT_MOMENT_BUDGET)
    } else {
        ct_mixed::<BigInt>(f, &tm, &tn, p, q, DEFAULT_MOMENT_BUDGET)
    }
}

/// `p! / ((p/2)! 2^{p/2})`, the `p`-th moment of a standard Gaussian; 0 for
/// odd `p`.
pub fn gaussian_moment(p: u32) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    (1..p).step_by(2).map(|k| k as f64).product()
}

/// Main term `c_p sigma^p` and error scale `exp(p^2) N^{(p-1)/2} (ln N)^p`.
pub fn lemma1_prediction(p: u32, sigma_n: f64, n: usize) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::invalid("p must be >= 2"));
    }
    let main = gaussian_moment(p) * sigma_n.powi(p as i32);
    let nf = n as f64;
    let pf = p as f64;
    let err = (pf * pf).exp() * nf.powf((pf - 1.0) / 2.0) * nf.ln().powf(pf);
    Ok((main, err))
}
