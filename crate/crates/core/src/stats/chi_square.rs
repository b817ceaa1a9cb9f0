use super::gamma::chi_square_sf;
use crate::error::{Error, Result};
use crate::types::VoteTally;

/// Goodness-of-fit of a tally against the uniform distribution over its labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

pub fn chi_square_test(tally: &VoteTally) -> Result<ChiSquareTest> {
    let classes = tally.classes();
    if classes < 2 {
        return Err(Error::InvalidArgument(format!("chi-square needs at least 2 labels, got {classes}")));
    }
    let n = tally.total();
    if n == 0 {
        return Err(Error::EmptyTally);
    }
    let expected = n as f64 / classes as f64;
    let statistic = tally
        .counts()
        .iter()
        .map(|&c| {
            let d = f64::from(c) - expected;
            d * d
        })
        .sum::<f64>()
        / expected;
    let df = classes - 1;
    Ok(ChiSquareTest { statistic, degrees_of_freedom: df, p_value: chi_square_sf(statistic, df as f64) })
}

pub fn chi_square_p_value(tally: &VoteTally) -> Result<f64> {
    chi_square_test(tally).map(|t| t.p_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(counts: &[u32]) -> f64 {
        chi_square_p_value(&VoteTally::from_counts(counts.to_vec())).unwrap()
    }

    #[test]
    fn worked_p_values() {
        let a = p(&[0, 0, 7, 0, 1, 0, 2, 0, 0, 0]);
        assert!((a - 0.000001411).abs() / 0.000001411 < 1e-3, "{a}");
        let b = p(&[0, 0, 5, 0, 0, 0, 0, 0, 5, 0]);
        assert!((b - 0.000007599).abs() / 0.000007599 < 1e-3, "{b}");
    }

    #[test]
    fn uniform_tally_has_p_one() {
        let t = chi_square_test(&VoteTally::from_counts(vec![1; 10])).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        assert_eq!(p(&[1, 1, 1, 1]), 1.0);
    }

    #[test]
    fn two_agreeing_answers_reject_at_five_percent() {
        let t = chi_square_test(&VoteTally::from_counts(vec![2, 0, 0, 0, 0, 0, 0, 0, 0, 0])).unwrap();
        assert!((t.statistic - 18.0).abs() < 1e-12);
        assert_eq!(t.degrees_of_freedom, 9);
        assert!(t.p_value < 0.05 && t.p_value > 0.03, "{}", t.p_value);
    }

    #[test]
    fn single_answer_does_not_reject() {
        let t = chi_square_test(&VoteTally::from_counts(vec![1, 0, 0, 0, 0, 0, 0, 0, 0, 0])).unwrap();
        assert!((t.statistic - 9.0).abs() < 1e-12);
        assert!(t.p_value > 0.05);
    }

    #[test]
    fn empty_or_degenerate_tallies_are_errors() {
        assert!(matches!(chi_square_p_value(&VoteTally::new(10)), Err(Error::EmptyTally)));
        assert!(chi_square_p_value(&VoteTally::from_counts(vec![3])).is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut counts in prop::collection::vec(0u32..20, 2..12), seed in any::<u64>()) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let before = p(&counts);
            let len = counts.len();
            counts.rotate_left((seed as usize) % len);
            counts.reverse();
            prop_assert!((p(&counts) - before).abs() <= 1e-12 * before.max(1e-300));
        }

        #[test]
        fn concentrating_mass_never_raises_p(counts in prop::collection::vec(0u32..20, 2..12)) {
            let max_idx = (0..counts.len()).max_by_key(|&i| (counts[i], std::cmp::Reverse(i))).unwrap();
            // move one unit from the smallest non-max nonzero count onto the max
            let donor = (0..counts.len())
                .filter(|&i| i != max_idx && counts[i] > 0)
                .min_by_key(|&i| counts[i]);
            prop_assume!(donor.is_some());
            let donor = donor.unwrap();
            let before = p(&counts);
            let mut moved = counts.clone();
            moved[donor] -= 1;
            moved[max_idx] += 1;
            prop_assert!(p(&moved) <= before * (1.0 + 1e-12));
        }
    }
}
