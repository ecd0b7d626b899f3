use crate::error::{Error, Result};

/// Rearrangement that places the complement of `sub_indices` at the positions
/// `1, 2, 4, 8, ...` and walks `sub_indices` in order everywhere else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterleavePermutation {
    sub_indices: Vec<usize>,
}

impl InterleavePermutation {
    pub fn new(sub_indices: Vec<usize>) -> Result<Self> {
        if sub_indices.first() == Some(&0) {
            return Err(Error::invalid("indices are 1-based"));
        }
        if sub_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sub_indices must be strictly increasing"));
        }
        Ok(InterleavePermutation { sub_indices })
    }

    pub fn sub_indices(&self) -> &[usize] {
        &self.sub_indices
    }

    pub fn is_special(k: usize) -> bool {
        k.is_power_of_two()
    }

    /// `sigma(1), ..., sigma(k_max)`.
    pub fn prefix(&self, k_max: usize) -> Result<Vec<usize>> {
        let sub = &self.sub_indices;
        let mut out = Vec::with_capacity(k_max);
        let mut next_sub = 0usize;
        // complement cursor: candidate value and position of the first sub
        // element >= candidate
        let mut cand = 1usize;
        let mut sub_pos = 0usize;
        for k in 1..=k_max {
            if Self::is_special(k) {
                loop {
                    while sub_pos < sub.len() && sub[sub_pos] < cand {
                        sub_pos += 1;
                    }
                    if sub_pos == sub.len() {
                        // cannot certify membership of cand in the complement
                        // without a listed sub element beyond it
                        return Err(Error::invalid(format!(
                            "complement of sub_indices exhausted at position k = {k}"
                        )));
                    }
                    if sub[sub_pos] == cand {
                        cand += 1;
                    } else {
                        break;
                    }
                }
                out.push(cand);
                cand += 1;
            } else {
                let v = *sub.get(next_sub).ok_or_else(|| {
                    Error::invalid(format!("sub_indices exhausted at position k = {k}"))
                })?;
                out.push(v);
                next_sub += 1;
            }
        }
        Ok(out)
    }
}

pub fn permute_interleave(sub_indices: &[usize], k_max: usize) -> Result<Vec<usize>> {
    InterleavePermutation::new(sub_indices.to_vec())?.prefix(k_max)
}
