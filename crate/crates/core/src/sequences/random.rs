use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::{FamilyTag, IntegerSequence, OmegaSchedule, Term};
use crate::error::{Error, Result};

/// `ceil(a * k^omega)`, with `B(0) = 0`.
///
/// Small values go through `f64` directly; larger ones are assembled from a
/// 53-bit mantissa of `2^{log2 a + omega log2 k}`. Integer exponents are
/// computed exactly.
fn boundary(a: u64, k: usize, omega: f64) -> BigUint {
    if k == 0 {
        return BigUint::zero();
    }
    if k == 1 {
        return BigUint::from(a);
    }
    if omega.fract() == 0.0 && omega >= 0.0 && omega <= u32::MAX as f64 {
        return BigUint::from(a) * BigUint::from(k).pow(omega as u32);
    }
    let log2v = (a as f64).log2() + omega * (k as f64).log2();
    if log2v < 52.0 {
        let v = a as f64 * (k as f64).powf(omega);
        return BigUint::from(v.ceil() as u64);
    }
    let e = log2v.floor();
    let mant = (log2v - e).exp2() * (1u64 << 52) as f64;
    let mant = BigUint::from(mant.ceil() as u64);
    let e = e as u64;
    // mant * 2^(e - 52), rounded up
    mant << (e - 52)
}

/// Positive integers of `I_k = [a (k-1)^{omega_{k-1}}, a k^{omega_k})` as the
/// closed range `(lo, hi)`, or an error if the interval holds none.
pub fn interval_bounds(omega: &OmegaSchedule, a: u64, k: usize) -> Result<(BigUint, BigUint)> {
    if a < 1 {
        return Err(Error::invalid("a must be >= 1"));
    }
    if k == 0 {
        return Err(Error::invalid("interval index k must be >= 1"));
    }
    let prev = if k == 1 {
        BigUint::zero()
    } else {
        boundary(a, k - 1, omega.eval(k - 1))
    };
    let cur = boundary(a, k, omega.eval(k));
    let lo = if prev.is_zero() { BigUint::one() } else { prev };
    if cur <= lo {
        return Err(Error::invalid(format!("interval I_{k} contains no positive integer")));
    }
    let hi = cur - 1u32;
    Ok((lo, hi))
}

/// Uniform draw from `[0, width)` by rejection on `bits(width - 1)` random bits.
fn uniform_below(rng: &mut ChaCha20Rng, width: &BigUint) -> BigUint {
    debug_assert!(!width.is_zero());
    let max = width - 1u32;
    let bits = max.bits();
    if bits == 0 {
        return BigUint::zero();
    }
    if bits <= 64 {
        let max = max.to_u64().expect("fits");
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        loop {
            let x = rng.next_u64() & mask;
            if x <= max {
                return BigUint::from(x);
            }
        }
    }
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let top_mask = if top_bits == 32 { u32::MAX } else { (1u32 << top_bits) - 1 };
    let mut buf = vec![0u32; words];
    loop {
        for w in buf.iter_mut() {
            *w = rng.next_u32();
        }
        buf[words - 1] &= top_mask;
        let x = BigUint::new(buf.clone());
        if x <= max {
            return x;
        }
    }
}

/// `n_k` uniform on the positive integers of `I_k`, independently over k.
///
/// Term `k` is drawn from its own ChaCha20 stream (`stream = k`), so the
/// output does not depend on how the work is split across threads.
pub fn gen_random_omega(
    omega: &OmegaSchedule,
    a: u64,
    count: usize,
    seed: u64,
) -> Result<IntegerSequence> {
    if a < 1 {
        return Err(Error::invalid("a must be >= 1"));
    }
    if count == 0 {
        return Err(Error::invalid("count must be >= 1"));
    }
    let bounds = (1..=count)
        .map(|k| interval_bounds(omega, a, k))
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<Term> = bounds
        .into_par_iter()
        .enumerate()
        .map(|(i, (lo, hi))| {
            let width = &hi - &lo + 1u32;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            Term::new(lo + uniform_below(&mut rng, &width)).expect("positive")
        })
        .collect();
    IntegerSequence::new(
        terms,
        FamilyTag::RandomOmega,
        vec![
            ("omega".into(), omega.to_string()),
            ("a".into(), a.to_string()),
            ("count".into(), count.to_string()),
        ],
        Some(seed),
    )
    .map_err(|e| Error::invalid(format!("random intervals overlap: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_intervals() {
        let om = OmegaSchedule::sqrt();
        let (lo, hi) = interval_bounds(&om, 4, 1).unwrap();
        assert_eq!((lo, hi), (BigUint::from(1u32), BigUint::from(3u32)));
        let (lo, hi) = interval_bounds(&om, 4, 2).unwrap();
        assert_eq!((lo, hi), (BigUint::from(4u32), BigUint::from(10u32)));
        for seed in 0..50 {
            let s = gen_random_omega(&om, 4, 2, seed).unwrap();
            let v: Vec<u64> = s.terms().iter().map(|t| t.to_u64().unwrap()).collect();
            assert!((1..=3).contains(&v[0]) && (4..=10).contains(&v[1]));
        }
    }

    #[test]
    fn integer_exponents_are_exact() {
        let om = OmegaSchedule::constant(3.0);
        let (lo, hi) = interval_bounds(&om, 5, 40).unwrap();
        assert_eq!(lo, BigUint::from(5u32 * 39 * 39 * 39));
        assert_eq!(hi, BigUint::from(5u32 * 40 * 40 * 40 - 1));
        let om = OmegaSchedule::constant(40.0);
        let (_, hi) = interval_bounds(&om, 1, 3).unwrap();
        assert_eq!(hi, BigUint::from(3u32).pow(40) - 1u32);
    }

    #[test]
    fn large_boundaries_track_float_value() {
        let om = OmegaSchedule::sqrt();
        let (lo, hi) = interval_bounds(&om, 16, 512).unwrap();
        let expect_hi = 4.0 + 512f64.sqrt() * 512f64.log2();
        let got = (hi.bits() as f64) - 1.0;
        assert!((got - expect_hi.floor()).abs() <= 1.0);
        assert!(lo < hi);
    }

    #[test]
    fn empty_interval_names_k() {
        // omega = 0.1, a = 2: I_2 = [2, 2.14) holds 2, I_3 = [2.14, 2.23) holds nothing
        let om = OmegaSchedule::constant(0.1);
        let err = gen_random_omega(&om, 2, 3, 0).unwrap_err();
        assert!(err.to_string().contains("I_3"), "{err}");
        assert!(gen_random_omega(&om, 1, 1, 0).is_err());
        assert!(gen_random_omega(&om, 0, 3, 0).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let om = OmegaSchedule::sqrt();
        let a = gen_random_omega(&om, 16, 200, 7).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| gen_random_omega(&om, 16, 200, 7).unwrap());
        assert_eq!(a, b);
        let c = gen_random_omega(&om, 16, 200, 8).unwrap();
        assert_ne!(a, c);
    }
}
