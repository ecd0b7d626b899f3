use num_bigint::BigUint;
use num_traits::One;

use super::{FamilyTag, IntegerSequence, Term};
use crate::error::{Error, Result};

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases suffice below 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn gen_hlp(primes: &[u64], count: usize) -> Result<IntegerSequence> {
    gen_hlp_with(primes, count, true)
}

/// First `count` products of powers of `primes`, ascending. `include_one`
/// controls whether the empty product starts the sequence.
pub fn gen_hlp_with(primes: &[u64], count: usize, include_one: bool) -> Result<IntegerSequence> {
    if primes.is_empty() {
        return Err(Error::invalid("hlp needs at least one prime"));
    }
    let mut ps = primes.to_vec();
    ps.sort_unstable();
    if ps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("hlp primes must be distinct"));
    }
    if let Some(&bad) = ps.iter().find(|&&p| !is_prime_u64(p)) {
        return Err(Error::invalid(format!("{bad} is not prime")));
    }

    let target = count + usize::from(!include_one);
    let mut out: Vec<BigUint> = Vec::with_capacity(target);
    if target > 0 {
        out.push(BigUint::one());
    }
    let mut ptr = vec![0usize; ps.len()];
    let mut next: Vec<BigUint> = ps.iter().map(|&p| BigUint::from(p)).collect();
    while out.len() < target {
        let v = next.iter().min().cloned().expect("nonempty");
        out.push(v);
        let v = out.last().expect("just pushed");
        for i in 0..ps.len() {
            if next[i] == *v {
                ptr[i] += 1;
                next[i] = &out[ptr[i]] * ps[i];
            }
        }
    }
    if !include_one && !out.is_empty() {
        out.remove(0);
    }
    let terms = out.into_iter().map(|v| Term::new(v).expect("positive")).collect();
    let plist: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
    IntegerSequence::new(
        terms,
        FamilyTag::Hlp,
        vec![
            ("primes".into(), plist.join(",")),
            ("count".into(), count.to_string()),
            ("include_one".into(), include_one.to_string()),
        ],
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(s: &IntegerSequence) -> Vec<u64> {
        s.terms().iter().map(|t| t.to_u64().unwrap()).collect()
    }

    fn smooth_brute(primes: &[u64], count: usize) -> Vec<u64> {
        (1u64..)
            .filter(|&n| {
                let mut m = n;
                for &p in primes {
                    while m % p == 0 {
                        m /= p;
                    }
                }
                m == 1
            })
            .take(count)
            .collect()
    }

    #[test]
    fn examples() {
        assert_eq!(vals(&gen_hlp(&[2, 3], 8).unwrap()), vec![1, 2, 3, 4, 6, 8, 9, 12]);
        assert_eq!(vals(&gen_hlp(&[2], 4).unwrap()), vec![1, 2, 4, 8]);
        assert_eq!(
            vals(&gen_hlp(&[2, 3, 5], 10).unwrap()),
            vec![1, 2, 3, 4, 5, 6, 8, 9, 10, 12]
        );
        assert_eq!(vals(&gen_hlp_with(&[2, 3], 3, false).unwrap()), vec![2, 3, 4]);
    }

    #[test]
    fn matches_brute_force() {
        for primes in [&[2u64, 3][..], &[3, 5, 7], &[2, 7, 11, 13]] {
            assert_eq!(vals(&gen_hlp(primes, 200).unwrap()), smooth_brute(primes, 200));
        }
    }

    #[test]
    fn rejects_composites() {
        assert!(gen_hlp(&[2, 4], 5).is_err());
        assert!(gen_hlp(&[1], 5).is_err());
        assert!(gen_hlp(&[], 5).is_err());
        assert!(gen_hlp(&[3, 3], 5).is_err());
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime_u64(100003));
        assert!(is_prime_u64(18446744073709551557));
        assert!(!is_prime_u64(3215031751));
    }
}
