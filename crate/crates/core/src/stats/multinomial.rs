use std::sync::OnceLock;

use super::gamma::ln_gamma;
use crate::error::{Error, Result};
use crate::types::{ProbabilityVector, VoteTally};

// 170! is the largest factorial representable in an f64.
const MAX_EXACT_FACTORIAL: usize = 170;
// Below this the direct product has lost precision to underflow.
const DIRECT_FLOOR: f64 = 1e-290;

fn factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(MAX_EXACT_FACTORIAL + 1);
        let mut f = 1.0f64;
        t.push(f);
        for n in 1..=MAX_EXACT_FACTORIAL {
            f *= n as f64;
            t.push(f);
        }
        t
    })
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n as usize <= MAX_EXACT_FACTORIAL {
        factorials()[n as usize].ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `C(n, k)` as a float (exact while it fits in 53 bits).
pub fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 1000 {
        let mut c = 1.0f64;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        // Intermediate divisions can leave an ulp of residue on integral values.
        if c < 9.007_199_254_740_992e15 {
            c.round()
        } else {
            c
        }
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// `P(X = k)` for `X ~ Binomial(n, p)`.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= 60 {
        let direct = binomial_coefficient(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
        if direct > DIRECT_FLOOR {
            return direct;
        }
    }
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln())
        .exp()
}

/// Number of tallies of `total` votes over `parts` labels, `C(total + parts - 1, parts - 1)`.
pub fn compositions_count(total: u64, parts: usize) -> f64 {
    if parts == 0 {
        return if total == 0 { 1.0 } else { 0.0 };
    }
    binomial_coefficient(total + parts as u64 - 1, parts as u64 - 1)
}

/// Calls `f` with every tally of `total` votes over `parts` labels.
pub(crate) fn for_each_composition(total: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(buf: &mut Vec<u32>, left: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
        if buf.len() + 1 == parts {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for c in 0..=left {
            buf.push(c);
            rec(buf, left - c, parts, f);
            buf.pop();
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    rec(&mut Vec::with_capacity(parts), total, parts, f);
}

pub(crate) fn multinomial_pmf_raw(counts: &[u32], probs: &[f64]) -> f64 {
    debug_assert_eq!(counts.len(), probs.len());
    if counts.iter().zip(probs).any(|(&c, &p)| c > 0 && p <= 0.0) {
        return 0.0;
    }
    let n: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if n as usize <= MAX_EXACT_FACTORIAL {
        let f = factorials();
        let mut value = f[n as usize];
        for (&c, &p) in counts.iter().zip(probs) {
            if c > 0 {
                value *= p.powi(c as i32) / f[c as usize];
            }
        }
        if value > DIRECT_FLOOR {
            return value;
        }
    }
    let mut ln = ln_factorial(n);
    for (&c, &p) in counts.iter().zip(probs) {
        if c > 0 {
            ln += f64::from(c) * p.ln() - ln_factorial(u64::from(c));
        }
    }
    ln.exp()
}

/// Probability of observing exactly `tally` from `tally.total()` independent
/// draws of `p`.
pub fn multinomial_pmf(tally: &VoteTally, p: &ProbabilityVector) -> Result<f64> {
    if tally.classes() != p.classes() {
        return Err(Error::DimensionMismatch { expected: p.classes(), actual: tally.classes() });
    }
    Ok(multinomial_pmf_raw(tally.counts(), p.probs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::make_uniform_noise_vector;

    #[test]
    fn degenerate_distribution() {
        let p = ProbabilityVector::new(vec![1.0, 0.0, 0.0], 0).unwrap();
        assert_eq!(multinomial_pmf(&VoteTally::from_counts(vec![3, 0, 0]), &p).unwrap(), 1.0);
        assert_eq!(multinomial_pmf(&VoteTally::from_counts(vec![2, 1, 0]), &p).unwrap(), 0.0);
    }

    #[test]
    fn fair_coin_three_flips() {
        // 3!/(2!1!) * 0.5^3
        assert!((multinomial_pmf_raw(&[2, 1], &[0.5, 0.5]) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let p = make_uniform_noise_vector(3, 0.2, 0).unwrap();
        assert!(matches!(
            multinomial_pmf(&VoteTally::from_counts(vec![1, 1]), &p),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn normalizes_over_fixed_totals() {
        let p = ProbabilityVector::new(vec![0.5, 0.3, 0.2], 0).unwrap();
        let mut sum = 0.0;
        for_each_composition(4, 3, &mut |c| sum += multinomial_pmf_raw(c, p.probs()));
        assert!((sum - 1.0).abs() < 1e-14);

        let vectors: [&[f64]; 3] = [&[0.7, 0.3], &[0.5, 0.3, 0.2], &[0.4, 0.3, 0.2, 0.1]];
        for probs in vectors {
            for total in 0..=6 {
                let mut sum = 0.0;
                let mut n = 0usize;
                for_each_composition(total, probs.len(), &mut |c| {
                    sum += multinomial_pmf_raw(c, probs);
                    n += 1;
                });
                assert!((sum - 1.0).abs() < 1e-14, "l={} total={total} sum={sum}", probs.len());
                assert_eq!(n as f64, compositions_count(total as u64, probs.len()));
            }
        }
    }

    #[test]
    fn large_totals_fall_back_to_logs() {
        // Binomial(1000, 0.5) at the mode, checked against Stirling-free log evaluation.
        let direct = multinomial_pmf_raw(&[500, 500], &[0.5, 0.5]);
        let expected = (ln_factorial(1000) - 2.0 * ln_factorial(500) + 1000.0 * 0.5f64.ln()).exp();
        assert!((direct - expected).abs() / expected < 1e-12);
        assert!((direct - 0.025_225_018_178_360_3).abs() < 1e-12);
    }

    #[test]
    fn binomial_pmf_basics() {
        assert_eq!(binomial_pmf(1, 1, 0.8), 0.8);
        assert_eq!(binomial_pmf(5, 5, 1.0), 1.0);
        assert_eq!(binomial_pmf(5, 4, 1.0), 0.0);
        assert_eq!(binomial_pmf(5, 0, 0.0), 1.0);
        let s: f64 = (0..=300).map(|k| binomial_pmf(300, k, 0.2)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(binomial_coefficient(10, 3), 120.0);
        assert_eq!(binomial_coefficient(24, 9), 1_307_504.0);
    }
}
