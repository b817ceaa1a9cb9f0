//! One labeling pass over an ordered stream of examples under a global query
//! budget.
//!
//! Each example draws its answers from the stream derived from
//! `(master_seed, example.id)`, so the outcome does not depend on which
//! worker validates it. Budget-insensitive policies are validated
//! speculatively in parallel chunks and then committed against the ledger in
//! stream order; an example that would overdraw the ledger is re-run
//! sequentially against the real ledger. Scheduled policies read the ledger
//! on every decision and run sequentially.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::policy::{validate_example, FinalizeReason, Policy, Validation};
use crate::rng::RandomStream;
use crate::types::{BudgetLedger, Example, LabelId, VoteTally};

const CHUNK: usize = 2048;

pub const CSV_HEADER: &str = "example_id,assigned_label,true_label,queries_used,correct,finalize_reason,peaked";

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledExample {
    pub example_id: u64,
    pub assigned_label: LabelId,
    pub true_label: LabelId,
    pub queries_used: u64,
    pub tally: VoteTally,
    pub correct: bool,
    pub finalize_reason: FinalizeReason,
    pub peaked: bool,
}

impl LabeledExample {
    fn new(example: &Example, v: Validation) -> Self {
        Self {
            example_id: example.id,
            assigned_label: v.label,
            true_label: example.true_label,
            queries_used: v.queries_used,
            correct: v.label == example.true_label,
            finalize_reason: v.reason,
            peaked: v.peaked,
            tally: v.tally,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    pub labeled: Vec<LabeledExample>,
    pub s_max: u64,
    pub total_queries: u64,
    /// `None` when nothing was labeled.
    pub label_accuracy: Option<f64>,
    pub mean_validations: f64,
    /// Population standard deviation of queries per example.
    pub std_validations: f64,
}

impl CampaignResult {
    pub fn new(labeled: Vec<LabeledExample>, s_max: u64) -> Self {
        let n = labeled.len();
        let total_queries: u64 = labeled.iter().map(|l| l.queries_used).sum();
        let (label_accuracy, mean, std) = if n == 0 {
            (None, 0.0, 0.0)
        } else {
            let correct = labeled.iter().filter(|l| l.correct).count();
            let mean = total_queries as f64 / n as f64;
            let var = labeled.iter().map(|l| (l.queries_used as f64 - mean).powi(2)).sum::<f64>() / n as f64;
            (Some(correct as f64 / n as f64), mean, var.sqrt())
        };
        Self { labeled, s_max, total_queries, label_accuracy, mean_validations: mean, std_validations: std }
    }

    /// Per-example CSV, rows ordered by example id.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut rows: Vec<&LabeledExample> = self.labeled.iter().collect();
        rows.sort_by_key(|l| l.example_id);
        writeln!(out, "{CSV_HEADER}")?;
        for l in rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                l.example_id, l.assigned_label, l.true_label, l.queries_used, l.correct, l.finalize_reason, l.peaked
            )?;
        }
        out.flush()
    }
}

/// Aggregate metrics of a campaign. Renders as `key=value` lines; absent
/// values are written as `NA`.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignSummary {
    pub labeled: usize,
    pub s_max: u64,
    pub total_queries: u64,
    pub label_accuracy: Option<f64>,
    pub mean_validations: Option<f64>,
    pub std_validations: Option<f64>,
    pub finalized: BTreeMap<&'static str, usize>,
    pub peaked: usize,
}

pub fn summarize(result: &CampaignResult) -> CampaignSummary {
    let mut finalized: BTreeMap<&'static str, usize> =
        [FinalizeReason::Policy, FinalizeReason::Budget, FinalizeReason::Cap].iter().map(|r| (r.as_str(), 0)).collect();
    for l in &result.labeled {
        *finalized.entry(l.finalize_reason.as_str()).or_default() += 1;
    }
    let any = !result.labeled.is_empty();
    CampaignSummary {
        labeled: result.labeled.len(),
        s_max: result.s_max,
        total_queries: result.total_queries,
        label_accuracy: result.label_accuracy,
        mean_validations: any.then_some(result.mean_validations),
        std_validations: any.then_some(result.std_validations),
        finalized,
        peaked: result.labeled.iter().filter(|l| l.peaked).count(),
    }
}

struct OrNa(Option<f64>);

impl fmt::Display for OrNa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(x) => write!(f, "{x}"),
            None => f.write_str("NA"),
        }
    }
}

impl fmt::Display for CampaignSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "labeled={}", self.labeled)?;
        writeln!(f, "s_max={}", self.s_max)?;
        writeln!(f, "total_queries={}", self.total_queries)?;
        writeln!(f, "label_accuracy={}", OrNa(self.label_accuracy))?;
        writeln!(f, "mean_validations={}", OrNa(self.mean_validations))?;
        writeln!(f, "std_validations={}", OrNa(self.std_validations))?;
        for (reason, n) in &self.finalized {
            writeln!(f, "finalized_{}={n}", reason.to_ascii_lowercase())?;
        }
        writeln!(f, "peaked={}", self.peaked)
    }
}

fn validate_one<O: Oracle + ?Sized>(
    oracle: &O,
    policy: &Policy,
    example: &Example,
    budget: &BudgetLedger,
    master_seed: u64,
) -> Result<Validation> {
    validate_example(policy, oracle, example, budget, &mut RandomStream::derive(master_seed, example.id))
}

/// Labels `examples` in order until the stream ends or `s_max` queries are
/// spent. The result depends only on the inputs and `master_seed`, not on the
/// size of the rayon pool it runs in.
pub fn run_campaign<O: Oracle + ?Sized>(
    oracle: &O,
    policy: &Policy,
    s_max: u64,
    examples: &[Example],
    master_seed: u64,
) -> Result<CampaignResult> {
    if s_max == 0 {
        return Err(Error::InvalidArgument("campaign budget must be at least 1".into()));
    }
    if examples.is_empty() {
        return Err(Error::InvalidArgument("campaign needs at least one example".into()));
    }
    let ledger = BudgetLedger::new(s_max);
    let mut labeled = Vec::new();

    if policy.budget_sensitive() {
        for example in examples {
            if ledger.remaining() == 0 {
                break;
            }
            let v = validate_one(oracle, policy, example, &ledger, master_seed)?;
            labeled.push(LabeledExample::new(example, v));
        }
        return Ok(CampaignResult::new(labeled, s_max));
    }

    'chunks: for chunk in examples.chunks(CHUNK) {
        let available = ledger.remaining();
        if available == 0 {
            break;
        }
        let speculative: Vec<Result<Validation>> = chunk
            .par_iter()
            .map(|example| validate_one(oracle, policy, example, &BudgetLedger::new(available), master_seed))
            .collect();
        for (example, outcome) in chunk.iter().zip(speculative) {
            let remaining = ledger.remaining();
            if remaining == 0 {
                break 'chunks;
            }
            let v = outcome?;
            let v = if v.queries_used <= remaining {
                // same answers and verdicts as a run against the real ledger
                ledger.try_consume(v.queries_used)?;
                v
            } else {
                validate_one(oracle, policy, example, &ledger, master_seed)?
            };
            labeled.push(LabeledExample::new(example, v));
        }
    }
    Ok(CampaignResult::new(labeled, s_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::UniformNoiseOracle;
    use crate::stats::strict_majority_prob_exact;

    fn examples(n: u64, classes: usize) -> Vec<Example> {
        (0..n).map(|i| Example::new(i, LabelId((i % classes as u64) as usize))).collect()
    }

    fn policy(s: &str) -> Policy {
        s.parse().unwrap()
    }

    fn sequential(oracle: &UniformNoiseOracle, p: &Policy, s_max: u64, ex: &[Example], seed: u64) -> CampaignResult {
        let ledger = BudgetLedger::new(s_max);
        let mut out = Vec::new();
        for e in ex {
            if ledger.remaining() == 0 {
                break;
            }
            let v = validate_example(p, oracle, e, &ledger, &mut RandomStream::derive(seed, e.id)).unwrap();
            out.push(LabeledExample::new(e, v));
        }
        CampaignResult::new(out, s_max)
    }

    #[test]
    fn fixed_three_on_nine_queries() {
        let oracle = UniformNoiseOracle::new(10, 0.2).unwrap();
        let r = run_campaign(&oracle, &policy("fixed:v=3"), 9, &examples(10, 10), 1).unwrap();
        assert_eq!(r.labeled.len(), 3);
        assert_eq!(r.total_queries, 9);
    }

    #[test]
    fn fixed_one_on_five_queries() {
        let oracle = UniformNoiseOracle::new(10, 0.2).unwrap();
        let r = run_campaign(&oracle, &policy("fixed:v=1"), 5, &examples(10, 10), 1).unwrap();
        assert_eq!(r.labeled.len(), 5);
        assert!(r.labeled.iter().all(|l| l.queries_used == 1));
    }

    #[test]
    fn partial_last_example_is_kept() {
        let oracle = UniformNoiseOracle::new(10, 0.2).unwrap();
        let r = run_campaign(&oracle, &policy("fixed:v=3"), 10, &examples(10, 10), 1).unwrap();
        assert_eq!(r.labeled.len(), 4);
        assert_eq!(r.total_queries, 10);
        let last = r.labeled.last().unwrap();
        assert_eq!(last.queries_used, 1);
        assert_eq!(last.finalize_reason, FinalizeReason::Budget);
    }

    #[test]
    fn short_stream_ends_early() {
        let oracle = UniformNoiseOracle::new(10, 0.2).unwrap();
        let r = run_campaign(&oracle, &policy("fixed:v=7"), 1000, &examples(4, 10), 1).unwrap();
        assert_eq!(r.labeled.len(), 4);
        assert_eq!(r.total_queries, 28);
        assert_eq!(r.mean_validations, 7.0);
        assert_eq!(r.std_validations, 0.0);
    }

    #[test]
    fn rejects_empty_inputs() {
        let oracle = UniformNoiseOracle::new(10, 0.2).unwrap();
        assert!(run_campaign(&oracle, &policy("fixed:v=1"), 0, &examples(4, 10), 1).is_err());
        assert!(run_campaign(&oracle, &policy("fixed:v=1"), 5, &[], 1).is_err());
    }

    #[test]
    fn speculative_path_matches_sequential_reference() {
        let oracle = UniformNoiseOracle::new(10, 0.6).unwrap();
        let ex = examples(5000, 10);
        for (spec, s_max) in
            [("chi:threshold=0.05", 20_011), ("fixed:v=7", 9_999), ("chi:threshold=0.05;cap=9", 50_000)]
        {
            let p = policy(spec);
            let fast = run_campaign(&oracle, &p, s_max, &ex, 17).unwrap();
            assert_eq!(fast, sequential(&oracle, &p, s_max, &ex, 17), "{spec}");
        }
    }

    #[test]
    fn pool_size_does_not_change_output() {
        let oracle = UniformNoiseOracle::new(10, 0.4).unwrap();
        let ex = examples(9000, 10);
        let p = policy("chi:threshold=0.05");
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let r = pool.install(|| run_campaign(&oracle, &p, 30_000, &ex, 5).unwrap());
            let mut csv = Vec::new();
            r.write_csv(&mut csv).unwrap();
            (csv, summarize(&r).to_string())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn scheduled_single_stage_equals_fixed() {
        let oracle = UniformNoiseOracle::new(10, 0.4).unwrap();
        let ex = examples(3000, 10);
        let render = |p: &Policy| {
            let r = run_campaign(&oracle, p, 10_000, &ex, 3).unwrap();
            let mut csv = Vec::new();
            r.write_csv(&mut csv).unwrap();
            csv
        };
        assert_eq!(render(&policy("scheduled:stages=5")), render(&policy("fixed:v=5")));
    }

    #[test]
    fn scheduled_campaign_steps_through_stages() {
        let oracle = UniformNoiseOracle::new(10, 0.2).unwrap();
        let r = run_campaign(&oracle, &policy("scheduled:stages=1,3,5,7;frac=0.1"), 10_000, &examples(10_000, 10), 3)
            .unwrap();
        assert_eq!(r.total_queries, 10_000);
        // one query each until the ledger reaches 1000; example 999 spends the
        // 1000th query and then sees the second stage
        assert!(r.labeled[..999].iter().all(|l| l.queries_used == 1));
        assert_eq!(r.labeled[999].queries_used, 3);
        let mut consumed = 0u64;
        for l in &r.labeled {
            assert!((1..=7).contains(&l.queries_used));
            if consumed >= 3000 && l.finalize_reason == FinalizeReason::Policy {
                assert_eq!(l.queries_used, 7);
            }
            consumed += l.queries_used;
        }
    }

    #[test]
    fn accuracy_tracks_exact_probability() {
        let oracle = UniformNoiseOracle::new(10, 0.4).unwrap();
        let n = 20_000u64;
        let r = run_campaign(&oracle, &policy("fixed:v=5"), 5 * n, &examples(n, 10), 11).unwrap();
        let p = strict_majority_prob_exact(10, 0.6, 5).unwrap().tie_resolved_prob;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((r.label_accuracy.unwrap() - p).abs() <= 4.0 * sigma);
    }

    #[test]
    fn summary_rendering() {
        let empty = CampaignResult::new(Vec::new(), 10);
        let text = summarize(&empty).to_string();
        assert!(text.contains("labeled=0\n"));
        assert!(text.contains("label_accuracy=NA\n"));
        assert!(text.contains("finalized_budget=0\n"));

        let oracle = UniformNoiseOracle::new(10, 0.0).unwrap();
        let r = run_campaign(&oracle, &policy("fixed:v=3"), 9, &examples(10, 10), 1).unwrap();
        assert_eq!(
            summarize(&r).to_string(),
            "labeled=3\ns_max=9\ntotal_queries=9\nlabel_accuracy=1\nmean_validations=3\nstd_validations=0\n\
             finalized_budget=0\nfinalized_cap=0\nfinalized_policy=3\npeaked=3\n"
        );
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            format!("{CSV_HEADER}\n0,0,0,3,true,POLICY,true\n1,1,1,3,true,POLICY,true\n2,2,2,3,true,POLICY,true\n")
        );
    }
}
