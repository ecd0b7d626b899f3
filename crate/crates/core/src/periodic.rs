//! Mean-zero trigonometric polynomials evaluated at exact rational points.
//!
//! All angle reduction happens in integers: `f(n u / v)` is computed from
//! `j n u mod v`, never from a floating-point product.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sequences::{IntegerSequence, Term};

/// A point `u / v` of `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    u: BigUint,
    v: BigUint,
    reduced: bool,
}

impl RationalPoint {
    pub fn new(u: BigUint, v: BigUint) -> Result<Self> {
        if v.is_zero() {
            return Err(Error::invalid("denominator must be positive"));
        }
        if u >= v {
            return Err(Error::invalid("numerator must satisfy 0 <= u < v"));
        }
        let reduced = u.gcd(&v) == BigUint::from(1u32);
        Ok(RationalPoint { u, v, reduced })
    }

    pub fn from_u64(u: u64, v: u64) -> Result<Self> {
        Self::new(BigUint::from(u), BigUint::from(v))
    }

    /// The point `frac(u / v)` for arbitrary `u`.
    pub fn wrapped(u: &BigUint, v: &BigUint) -> Result<Self> {
        if v.is_zero() {
            return Err(Error::invalid("denominator must be positive"));
        }
        Self::new(u % v, v.clone())
    }

    pub fn numerator(&self) -> &BigUint {
        &self.u
    }

    pub fn denominator(&self) -> &BigUint {
        &self.v
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// `frac(n * self)`.
    pub fn scaled(&self, n: &Term) -> RationalPoint {
        let u = (n.to_biguint() * &self.u) % &self.v;
        let reduced = u.gcd(&self.v) == BigUint::from(1u32);
        RationalPoint {
            u,
            v: self.v.clone(),
            reduced,
        }
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.u, self.v)
    }
}

/// `x = r / v` mapped to the symmetric representative in `[-1/2, 1/2)`.
#[inline]
pub(crate) fn centered_residue(r: u64, v: u64) -> f64 {
    let r = r as i128;
    let v = v as i128;
    let c = if 2 * r >= v { r - v } else { r };
    c as f64 / v as f64
}

/// `x = t / 2^128` mapped to `[-1/2, 1/2)`.
#[inline]
pub(crate) fn centered_turn(t: u128) -> f64 {
    (t as i128) as f64 * (-128f64).exp2()
}

fn centered_big(r: &BigUint, v: &BigUint) -> f64 {
    let r = BigInt::from(r.clone());
    let v = BigInt::from(v.clone());
    let c = if &r * 2 >= v { r - &v } else { r };
    // keep ~64 significant bits of the quotient
    let shift = v.bits().saturating_sub(64);
    let cf = (&c >> shift).to_f64().unwrap_or(0.0);
    let vf = (&v >> shift).to_f64().unwrap_or(1.0);
    cf / vf
}

/// A mean-zero trigonometric polynomial
/// `f(x) = sum_j a_j cos(2 pi j x) + b_j sin(2 pi j x)`, `j = 1..=D`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    cos: Vec<f64>,
    sin: Vec<f64>,
    variation_budget: f64,
}

impl TrigPolynomial {
    /// Coefficients are indexed from `j = 1`; trailing zeros are trimmed.
    /// The variation budget defaults to the smallest `V` with
    /// `|a_j|, |b_j| <= V / j`.
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let budget = min_budget(&cos, &sin);
        if budget == 0.0 {
            return Err(Error::invalid("function has no nonzero coefficient"));
        }
        Self::with_budget(cos, sin, budget)
    }

    pub fn with_budget(mut cos: Vec<f64>, mut sin: Vec<f64>, budget: f64) -> Result<Self> {
        if cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        while cos.last() == Some(&0.0) {
            cos.pop();
        }
        while sin.last() == Some(&0.0) {
            sin.pop();
        }
        let d = cos.len().max(sin.len());
        if d == 0 {
            return Err(Error::invalid("function has no nonzero coefficient"));
        }
        cos.resize(d, 0.0);
        sin.resize(d, 0.0);
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(Error::invalid("variation budget must be positive"));
        }
        let need = min_budget(&cos, &sin);
        if need > budget * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "coefficients exceed the variation budget: need V >= {need}, got {budget}"
            )));
        }
        Ok(TrigPolynomial {
            cos,
            sin,
            variation_budget: budget,
        })
    }

    /// `cos(2 pi x)`.
    pub fn cos1() -> Self {
        Self::new(vec![1.0], vec![]).expect("valid")
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// `a_j` for `j >= 1` (0 beyond the degree).
    pub fn cos_coeff(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        self.cos.get(j - 1).copied().unwrap_or(0.0)
    }

    pub fn sin_coeff(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        self.sin.get(j - 1).copied().unwrap_or(0.0)
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn variation_budget(&self) -> f64 {
        self.variation_budget
    }

    pub fn has_sine(&self) -> bool {
        self.sin.iter().any(|&b| b != 0.0)
    }

    /// Harmonics `j` with a nonzero coefficient.
    pub fn active_harmonics(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.degree()).filter(|&j| self.cos_coeff(j) != 0.0 || self.sin_coeff(j) != 0.0)
    }

    /// `f` at `x = q` with `q` already reduced to `[-1/2, 1/2)` as a turn
    /// fraction of harmonic `j`.
    #[inline]
    fn term(&self, j0: usize, q: f64) -> f64 {
        let (s, c) = (TAU * q).sin_cos();
        self.cos[j0] * c + self.sin[j0] * s
    }

    /// `f(r / v)` for a machine-size denominator.
    pub(crate) fn eval_residue(&self, r: u64, v: u64) -> f64 {
        let mut acc = 0.0;
        for j0 in 0..self.degree() {
            let jr = ((j0 as u128 + 1) * r as u128 % v as u128) as u64;
            acc += self.term(j0, centered_residue(jr, v));
        }
        acc
    }

    /// `f(t / 2^128)`.
    pub(crate) fn eval_turn(&self, t: u128) -> f64 {
        let mut acc = 0.0;
        for j0 in 0..self.degree() {
            let jt = t.wrapping_mul(j0 as u128 + 1);
            acc += self.term(j0, centered_turn(jt));
        }
        acc
    }

    fn eval_big(&self, u: &BigUint, v: &BigUint) -> f64 {
        let mut acc = 0.0;
        for j0 in 0..self.degree() {
            let ju = (u * (j0 as u64 + 1)) % v;
            acc += self.term(j0, centered_big(&ju, v));
        }
        acc
    }

    pub fn eval(&self, x: &RationalPoint) -> f64 {
        match (x.u.to_u64(), x.v.to_u64()) {
            (Some(u), Some(v)) => self.eval_residue(u, v),
            _ => self.eval_big(&x.u, &x.v),
        }
    }

    /// `f(n x)` with `n u mod v` reduced exactly first.
    pub fn scaled_eval(&self, n: &Term, x: &RationalPoint) -> f64 {
        match x.v.to_u64() {
            Some(v) => {
                let u = x.u.to_u64().expect("u < v");
                let nm = n.mod_u64(v);
                let r = (nm as u128 * u as u128 % v as u128) as u64;
                self.eval_residue(r, v)
            }
            None => self.eval(&x.scaled(n)),
        }
    }

    /// `S_N(x) = sum_{k <= N} f(n_k x)`.
    pub fn partial_sum(&self, seq: &IntegerSequence, n: usize, x: &RationalPoint) -> Result<f64> {
        if n > seq.len() {
            return Err(Error::OutOfRange {
                index: n,
                len: seq.len(),
            });
        }
        Ok(seq.terms()[..n].iter().map(|t| self.scaled_eval(t, x)).sum())
    }

    /// `||f||_2 = sqrt(sum_j (a_j^2 + b_j^2) / 2)`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        0.5 * self
            .cos
            .iter()
            .chain(self.sin.iter())
            .map(|c| c * c)
            .sum::<f64>()
    }

    /// `int f^2 + 2 sum_{k >= 1} int f(x) f(base^k x) dx`.
    pub fn kac_variance(&self, base: u64) -> Result<f64> {
        if base < 2 {
            return Err(Error::invalid(format!("base must be >= 2, got {base}")));
        }
        let d = self.degree() as u64;
        let mut total = self.l2_norm_sq();
        let mut mult = base;
        while mult <= d {
            let mut cross = 0.0;
            for j in 1..=d / mult {
                let jm = (j * mult) as usize;
                let j = j as usize;
                cross += self.cos_coeff(j) * self.cos_coeff(jm) + self.sin_coeff(j) * self.sin_coeff(jm);
            }
            total += cross;
            mult = match mult.checked_mul(base) {
                Some(m) => m,
                None => break,
            };
        }
        Ok(total)
    }
}

fn min_budget(cos: &[f64], sin: &[f64]) -> f64 {
    let a = cos.iter().enumerate().map(|(i, c)| (i + 1) as f64 * c.abs());
    let b = sin.iter().enumerate().map(|(i, c)| (i + 1) as f64 * c.abs());
    a.chain(b).fold(0.0, f64::max)
}

impl fmt::Display for TrigPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, coeffs) in [("cos", &self.cos), ("sin", &self.sin)] {
            for (i, c) in coeffs.iter().enumerate() {
                if *c == 0.0 {
                    continue;
                }
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                write!(f, "{name}:{}:{c:?}", i + 1)?;
            }
        }
        Ok(())
    }
}

/// Parses `cos:1:1.0,cos:2:0.5` or the line form `cos 1 1.0`. Repeated
/// harmonics add up.
impl FromStr for TrigPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cos: Vec<f64> = Vec::new();
        let mut sin: Vec<f64> = Vec::new();
        for (i, item) in s.split([',', '\n']).enumerate() {
            let item = item.trim();
            if item.is_empty() || item.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = if item.contains(':') {
                item.split(':').map(str::trim).collect()
            } else {
                item.split_whitespace().collect()
            };
            let bad = || Error::Parse {
                line: i + 1,
                msg: format!("expected 'cos|sin j coeff', got '{item}'"),
            };
            if parts.len() != 3 {
                return Err(bad());
            }
            let j: usize = parts[1].parse().map_err(|_| bad())?;
            let c: f64 = parts[2].parse().map_err(|_| bad())?;
            if j == 0 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "harmonic index must be >= 1 (mean-zero functions)".into(),
                });
            }
            let target = match parts[0] {
                "cos" => &mut cos,
                "sin" => &mut sin,
                _ => return Err(bad()),
            };
            if target.len() < j {
                target.resize(j, 0.0);
            }
            target[j - 1] += c;
        }
        TrigPolynomial::new(cos, sin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::gen_geometric;
    use proptest::prelude::*;

    fn pt(u: u64, v: u64) -> RationalPoint {
        RationalPoint::from_u64(u, v).unwrap()
    }

    fn f12() -> TrigPolynomial {
        "cos:1:1.0,cos:2:1.0".parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = TrigPolynomial::cos1();
        assert_eq!(f.eval(&pt(0, 1)), 1.0);
        assert!(f.eval(&pt(1, 4)).abs() < 1e-15);
        assert!((f12().eval(&pt(1, 3)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_eval_examples() {
        let f = TrigPolynomial::cos1();
        assert!((f.scaled_eval(&Term::from_u64(4).unwrap(), &pt(1, 8)) + 1.0).abs() < 1e-15);
        assert!((f.scaled_eval(&Term::pow2(60), &pt(1, 3)) + 0.5).abs() < 1e-15);
        assert_eq!(f.scaled_eval(&Term::pow2(5000), &pt(0, 7)), 1.0);
    }

    #[test]
    fn huge_denominators() {
        let f = f12();
        let v = BigUint::from(3u32).pow(60);
        let x = RationalPoint::new(BigUint::from(3u32).pow(59), v.clone()).unwrap();
        // x = 1/3
        assert!((f.eval(&x) + 1.0).abs() < 1e-15);
        let n = Term::pow2(4000);
        let direct = f.eval(&x.scaled(&n));
        assert_eq!(f.scaled_eval(&n, &x), direct);
    }

    #[test]
    fn partial_sums() {
        let f = TrigPolynomial::cos1();
        let one = IntegerSequence::from_u64s(&[1]).unwrap();
        assert!(f.partial_sum(&one, 1, &pt(1, 4)).unwrap().abs() < 1e-15);
        let s = IntegerSequence::from_u64s(&[1, 2, 4]).unwrap();
        assert!((f.partial_sum(&s, 3, &pt(1, 2)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(f.partial_sum(&s, 0, &pt(1, 2)).unwrap(), 0.0);
        assert!(f.partial_sum(&s, 4, &pt(1, 2)).is_err());
    }

    #[test]
    fn norms_and_kac() {
        let half = 0.5f64.sqrt();
        assert!((TrigPolynomial::cos1().l2_norm() - half).abs() < 1e-15);
        assert!((f12().l2_norm() - 1.0).abs() < 1e-15);
        let s: TrigPolynomial = "sin:1:1.0".parse().unwrap();
        assert!((s.l2_norm() - half).abs() < 1e-15);

        assert_eq!(TrigPolynomial::cos1().kac_variance(2).unwrap(), 0.5);
        assert_eq!(f12().kac_variance(2).unwrap(), 2.0);
        assert_eq!(s.kac_variance(3).unwrap(), 0.5);
        assert!(s.kac_variance(1).is_err());
    }

    #[test]
    fn budget_and_parsing() {
        let f: TrigPolynomial = "cos 1 1.0\ncos 2 0.5\nsin 3 0.25".parse().unwrap();
        assert_eq!(f.degree(), 3);
        assert_eq!(f.variation_budget(), 1.0);
        assert!(TrigPolynomial::with_budget(vec![1.0, 1.0], vec![], 1.0).is_err());
        assert!(TrigPolynomial::with_budget(vec![1.0, 1.0], vec![], 2.0).is_ok());
        assert!("cos:0:1.0".parse::<TrigPolynomial>().is_err());
        assert!("tan:1:1.0".parse::<TrigPolynomial>().is_err());
        assert!("cos:1:0.0".parse::<TrigPolynomial>().is_err());
        let g: TrigPolynomial = f.to_string().parse().unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn grid_orthogonality() {
        let f: TrigPolynomial = "cos:1:0.3,sin:2:-0.7,cos:4:0.2".parse().unwrap();
        let m = 11u64;
        let mean: f64 = (0..m).map(|j| f.eval(&pt(j, m))).sum::<f64>() / m as f64;
        assert!(mean.abs() < 1e-12);
        let sq: f64 = (0..m).map(|j| f.eval(&pt(j, m)).powi(2)).sum::<f64>() / m as f64;
        assert!((sq - f.l2_norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn geometric_partial_sum_against_big_path() {
        let f = f12();
        let seq = gen_geometric(2, 100).unwrap();
        let x = pt(12345, 100003);
        let fast = f.partial_sum(&seq, 100, &x).unwrap();
        let big_x = RationalPoint::new(BigUint::from(12345u32) << 70, BigUint::from(100003u32) << 70).unwrap();
        let slow = f.partial_sum(&seq, 100, &big_x).unwrap();
        assert!((fast - slow).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn periodicity(u in 0u64..1000, v in 1u64..1000, j in 1usize..5) {
            let u = u % v;
            let f = TrigPolynomial::new(vec![0.0; j - 1].into_iter().chain([0.7]).collect(), vec![0.2]).unwrap();
            let a = f.eval(&pt(u, v));
            let b = f.eval(&RationalPoint::wrapped(&BigUint::from(u + v), &BigUint::from(v)).unwrap());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn scaled_eval_is_eval_of_reduced_point(n in 1u64.., u in 0u64..1_000_000, v in 1u64..1_000_000) {
            let u = u % v;
            let f = f12();
            let x = pt(u, v);
            let t = Term::from_u64(n).unwrap();
            prop_assert_eq!(f.scaled_eval(&t, &x), f.eval(&x.scaled(&t)));
        }
    }
}
