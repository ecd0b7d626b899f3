use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::kernel::{DyadicPoint, TermKernel};
use super::selected_terms;
use crate::error::{Error, Result};
use crate::periodic::{RationalPoint, TrigPolynomial};
use crate::sequences::IntegerSequence;

/// `s / sqrt(2 N ln ln N)`, defined for `N >= 3`.
pub fn lil_ratio(s: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("LIL ratio needs N >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok(s / (2.0 * nf * nf.ln().ln()).sqrt())
}

/// LIL ratios of one run: `ratios[i][c]` is the ratio at point `i` and
/// checkpoint `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct LilScan {
    pub checkpoints: Vec<usize>,
    pub ratios: Vec<Vec<f64>>,
}

impl LilScan {
    /// Running maximum of the ratio over the checkpoints, per point.
    pub fn running_max(&self, i: usize) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.ratios[i]
            .iter()
            .map(|&r| {
                best = best.max(r);
                best
            })
            .collect()
    }

    /// Largest ratio seen at each point.
    pub fn maxima(&self) -> Vec<f64> {
        self.ratios
            .iter()
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

enum PointEval {
    Small(u64, u64),
    Dyadic(DyadicPoint),
    Big(RationalPoint),
}

impl PointEval {
    fn new(x: &RationalPoint) -> Self {
        let v = x.denominator();
        if let (Some(u), Some(v)) = (x.numerator().to_u64(), v.to_u64()) {
            return PointEval::Small(u, v);
        }
        let p = v.bits() - 1;
        if v.trailing_zeros() == Some(p) {
            return PointEval::Dyadic(DyadicPoint::new(x.numerator(), p));
        }
        PointEval::Big(x.clone())
    }
}

/// Running LIL ratios `S_N(x) / sqrt(2 N ln ln N)` at increasing checkpoints,
/// one pass over the terms per point.
pub fn lil_scan(
    f: &TrigPolynomial,
    seq: &IntegerSequence,
    perm: Option<&[usize]>,
    x_points: &[RationalPoint],
    checkpoints: &[usize],
) -> Result<LilScan> {
    let Some(&last) = checkpoints.last() else {
        return Err(Error::invalid("no checkpoints"));
    };
    if checkpoints[0] < 3 {
        return Err(Error::invalid(format!("LIL ratio needs N >= 3, got {}", checkpoints[0])));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly increasing"));
    }
    let terms = selected_terms(seq, perm, last)?;
    let kernels: Vec<TermKernel> = terms.iter().map(|t| TermKernel::new(t)).collect();
    let denominators: Vec<f64> = checkpoints
        .iter()
        .map(|&n| lil_ratio(1.0, n).map(|r| 1.0 / r))
        .collect::<Result<_>>()?;
    let ratios = x_points
        .par_iter()
        .map(|x| {
            let pe = PointEval::new(x);
            let mut row = Vec::with_capacity(checkpoints.len());
            let mut s = 0.0;
            let mut next = 0;
            for (k, term) in terms.iter().enumerate() {
                s += match &pe {
                    PointEval::Small(u, v) => {
                        let r = term.mod_u64(*v) as u128 * *u as u128 % *v as u128;
                        f.eval_residue(r as u64, *v)
                    }
                    PointEval::Dyadic(d) => d.eval(f, &kernels[k]),
                    PointEval::Big(x) => f.scaled_eval(term, x),
                };
                if k + 1 == checkpoints[next] {
                    row.push(s / denominators[next]);
                    next += 1;
                }
            }
            row
        })
        .collect();
    Ok(LilScan {
        checkpoints: checkpoints.to_vec(),
        ratios,
    })
}
