//! Exact reduction of `n_k x mod 1` for the two point families used in
//! sampling: grid points `u / v` with machine-size `v`, and dyadic points
//! `U / 2^P` of arbitrary precision.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::periodic::TrigPolynomial;
use crate::sequences::Term;

/// A term split as `odd * 2^shift`, with the odd part kept as `u64` when it
/// fits.
#[derive(Clone, Debug)]
pub(crate) struct TermKernel {
    odd_small: Option<u64>,
    odd: BigUint,
    odd_bits: u64,
    shift: u64,
}

impl TermKernel {
    pub(crate) fn new(t: &Term) -> Self {
        TermKernel {
            odd_small: t.odd_part().to_u64(),
            odd: t.odd_part().clone(),
            odd_bits: t.odd_part().bits(),
            shift: t.two_adic_shift(),
        }
    }
}

/// 64 bits of `digits` (little-endian) starting at bit `start`; bits outside
/// the number read as 0.
#[inline]
fn word_at(digits: &[u64], start: i64) -> u64 {
    if start <= -64 {
        return 0;
    }
    if start < 0 {
        return digits.first().copied().unwrap_or(0) << (-start);
    }
    let w = (start / 64) as usize;
    let off = (start % 64) as u32;
    let lo = digits.get(w).copied().unwrap_or(0);
    if off == 0 {
        return lo;
    }
    let hi = digits.get(w + 1).copied().unwrap_or(0);
    (lo >> off) | (hi << (64 - off))
}

/// `(r >> b) mod 2^128` for a 256-bit `r` and `b < 128`.
#[inline]
fn shr_256(r: [u64; 4], b: u32) -> u128 {
    let (q, off) = ((b / 64) as usize, b % 64);
    let limb = |i: usize| -> u64 {
        let lo = r.get(q + i).copied().unwrap_or(0);
        if off == 0 {
            lo
        } else {
            let hi = r.get(q + i + 1).copied().unwrap_or(0);
            (lo >> off) | (hi << (64 - off))
        }
    };
    limb(0) as u128 | ((limb(1) as u128) << 64)
}

/// A dyadic point `U / 2^P`.
#[derive(Clone, Debug)]
pub(crate) struct DyadicPoint {
    digits: Vec<u64>,
    precision: u64,
}

impl DyadicPoint {
    pub(crate) fn new(u: &BigUint, precision: u64) -> Self {
        DyadicPoint {
            digits: u.to_u64_digits(),
            precision,
        }
    }

    /// `frac(n x) * 2^128`, rounded down up to one unit.
    ///
    /// With `n = odd 2^s` and `L = P - s - 128`, this is
    /// `floor(odd U / 2^L) mod 2^128`; only the bits `[L - bits(odd), L + 128)`
    /// of `U` influence it beyond a carry of one unit.
    pub(crate) fn turn(&self, k: &TermKernel) -> u128 {
        let l = self.precision as i64 - k.shift as i64 - 128;
        if l + 128 <= 0 {
            return 0;
        }
        let b = k.odd_bits as i64;
        let start = l - b;
        match k.odd_small {
            Some(odd) => {
                let w = [word_at(&self.digits, start), word_at(&self.digits, start + 64), word_at(&self.digits, start + 128)];
                let mut r = [0u64; 4];
                let mut carry = 0u128;
                for i in 0..3 {
                    let p = odd as u128 * w[i] as u128 + carry;
                    r[i] = p as u64;
                    carry = p >> 64;
                }
                r[3] = carry as u64;
                shr_256(r, b as u32)
            }
            None => {
                let words = ((b + 128) as usize).div_ceil(64);
                let mut limbs = Vec::with_capacity(2 * words);
                for i in 0..words {
                    let w = word_at(&self.digits, start + 64 * i as i64);
                    limbs.push(w as u32);
                    limbs.push((w >> 32) as u32);
                }
                let mut win = BigUint::new(limbs);
                // drop bits at and above b + 128
                win &= (BigUint::from(1u8) << (b as usize + 128)) - 1u8;
                let prod: BigUint = (&k.odd * win) >> (b as usize);
                let d = prod.to_u64_digits();
                d.first().copied().unwrap_or(0) as u128 | ((d.get(1).copied().unwrap_or(0) as u128) << 64)
            }
        }
    }

    pub(crate) fn eval(&self, f: &TrigPolynomial, k: &TermKernel) -> f64 {
        f.eval_turn(self.turn(k))
    }
}
