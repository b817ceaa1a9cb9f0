//! Majority-vote accuracy over a grid of noise levels and validation counts.

use rayon::prelude::*;

use noisy_votes::oracle::UniformNoiseOracle;
use noisy_votes::stats::{
    compositions_count, majority_prob_mc, strict_majority_prob_exact, MajorityProbResult, MajorityTable,
    MonteCarloEstimate, ENUMERATION_LIMIT,
};
use noisy_votes::RandomStream;

use crate::{usage, CliResult};

pub const CSV_HEADER: &str = "l,w,v,strict_prob,tie_resolved_prob,mc_mean,mc_stderr";

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub classes: usize,
    pub noise: f64,
    pub votes: u32,
    pub exact: MajorityProbResult,
    pub mc: Option<MonteCarloEstimate>,
}

/// Parses `1-100`, `1,3,5` or mixtures such as `1-5,11,15-17`.
pub fn parse_validation_grid(text: &str) -> CliResult<Vec<u32>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        let parse =
            |s: &str| s.trim().parse::<u32>().map_err(|_| usage(format!("bad validation count {s:?} in {text:?}")));
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                if a > b {
                    return Err(usage(format!("empty range {item:?}")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse(item)?),
        }
    }
    if out.contains(&0) {
        return Err(usage("validation counts must be at least 1"));
    }
    Ok(out)
}

/// Rows in `noise`-major order. Cell `i` simulates on stream `i` of `seed`.
pub fn curve_rows(classes: usize, noise: &[f64], votes: &[u32], trials: u64, seed: u64) -> CliResult<Vec<CurveRow>> {
    if noise.is_empty() || votes.is_empty() {
        return Err(usage("the noise and validation grids must be non-empty"));
    }
    for &w in noise {
        UniformNoiseOracle::new(classes, w).map_err(usage)?;
    }
    if let Some(&v) = votes.iter().find(|&&v| v == 0) {
        return Err(usage(format!("validation count {v} must be at least 1")));
    }

    let large = |v: u32| compositions_count(u64::from(v), classes) > ENUMERATION_LIMIT;
    let table = match votes.iter().copied().filter(|&v| large(v)).max() {
        Some(max) => Some(MajorityTable::new(classes, max)?),
        None => None,
    };
    let cells: Vec<(f64, u32)> = noise.iter().flat_map(|&w| votes.iter().map(move |&v| (w, v))).collect();
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(w, v))| {
            let q = 1.0 - w;
            let exact = match &table {
                Some(t) if large(v) => t.probs(q, v)?,
                _ => strict_majority_prob_exact(classes, q, v)?,
            };
            let mc = if trials == 0 {
                None
            } else {
                Some(majority_prob_mc(classes, q, v, trials, &mut RandomStream::derive(seed, i as u64))?)
            };
            Ok(CurveRow { classes, noise: w, votes: v, exact, mc })
        })
        .collect::<noisy_votes::Result<Vec<_>>>()?;
    Ok(rows)
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (mean, se) = match &r.mc {
            Some(m) => (m.mean.to_string(), m.std_error.to_string()),
            None => ("NA".into(), "NA".into()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{mean},{se}\n",
            r.classes, r.noise, r.votes, r.exact.strict_prob, r.exact.tie_resolved_prob
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_validation_grid("1-5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_validation_grid("1,3, 11-12").unwrap(), vec![1, 3, 11, 12]);
        assert!(parse_validation_grid("0-3").is_err());
        assert!(parse_validation_grid("5-3").is_err());
        assert!(parse_validation_grid("a").is_err());
        assert!(parse_validation_grid("").is_err());
    }

    #[test]
    fn single_vote_rows_are_exactly_one_minus_w() {
        let noise: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
        for r in curve_rows(10, &noise, &[1], 0, 0).unwrap() {
            assert_eq!(r.exact.strict_prob, 1.0 - r.noise);
            assert!(r.mc.is_none());
        }
    }

    #[test]
    fn table_and_enumeration_paths_meet() {
        let rows = curve_rows(10, &[0.3], &[15, 16], 0, 0).unwrap();
        let dp = MajorityTable::new(10, 16).unwrap();
        for r in rows {
            let t = dp.probs(0.7, r.votes).unwrap();
            assert!((t.tie_resolved_prob - r.exact.tie_resolved_prob).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_noise_beyond_the_uniform_point() {
        assert!(curve_rows(10, &[0.2, 0.95], &[1], 10, 0).is_err());
        assert!(curve_rows(10, &[], &[1], 10, 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = curve_rows(10, &[0.5], &[1, 2], 1000, 3).unwrap();
        let csv = curves_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("10,0.5,1,0.5,0.5,"));
    }
}
