//! Probability machinery for majority-vote labeling and the chi-square
//! stopping rule.

mod chi_square;
mod gamma;
mod majority;
mod multinomial;

pub use chi_square::{chi_square_p_value, chi_square_test, ChiSquareTest};
pub use gamma::{chi_square_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use majority::{
    majority_prob_dp, majority_prob_enumerated, majority_prob_mc, majority_vote, strict_majority_prob_exact,
    vote_counts, MajorityProbResult, MajorityTable, MonteCarloEstimate, ENUMERATION_LIMIT,
};
pub use multinomial::{binomial_coefficient, binomial_pmf, compositions_count, multinomial_pmf};
