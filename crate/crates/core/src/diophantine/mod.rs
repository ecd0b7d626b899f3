//! Linear relations among sequence elements and exact moments of `S_N`.

mod moments;
mod search;

pub use moments::{
    gaussian_moment, lemma1_prediction, moment_exact, moment_exact_with_budget, moment_mixed, Exponent,
    FrequencyPolynomial, DEFAULT_MOMENT_BUDGET,
};
pub use search::{
    check_a_omega, count_solutions, witness_summary, AomegaOutcome, AomegaVerdict, DiophantineQuery,
    DiophantineSolution, DEFAULT_WORK_BUDGET,
};
