//! Validation policies: when to stop querying the oracle for an example.
//!
//! Policies are written as `kind:key=value;key=value`:
//!
//! ```text
//! fixed:v=5
//! scheduled:stages=1,3,5,7;frac=0.1
//! chi:threshold=0.05;cap=0        (cap=0 means no cap)
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::RandomStream;
use crate::stats::{chi_square_p_value, majority_vote};
use crate::types::{BudgetLedger, Example, LabelId, VoteTally};

// Absorbs rounding when the consumed fraction lands on a stage boundary.
const STAGE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyDecision {
    Continue,
    Finalize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FinalizeReason {
    /// The policy's own stopping rule fired.
    Policy,
    /// The global budget ran out first.
    Budget,
    /// The chi-square policy hit its validation cap.
    Cap,
}

impl FinalizeReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FinalizeReason::Policy => "POLICY",
            FinalizeReason::Budget => "BUDGET",
            FinalizeReason::Cap => "CAP",
        }
    }
}

impl fmt::Display for FinalizeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPolicy {
    v: u32,
}

impl FixedPolicy {
    pub fn new(v: u32) -> Result<Self> {
        if v == 0 {
            return Err(Error::InvalidArgument("fixed policy needs v >= 1".into()));
        }
        Ok(Self { v })
    }

    pub fn v(&self) -> u32 {
        self.v
    }
}

/// Steps through `stages` as the budget is spent: each stage covers
/// `stage_fraction` of the budget and the last one covers whatever remains.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledPolicy {
    stages: Vec<u32>,
    stage_fraction: f64,
}

impl ScheduledPolicy {
    pub const DEFAULT_FRACTION: f64 = 0.1;

    pub fn new(stages: Vec<u32>, stage_fraction: f64) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("schedule needs at least one stage".into()));
        }
        if stages[0] == 0 {
            return Err(Error::InvalidArgument("schedule stages must be positive".into()));
        }
        if stages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("schedule stages must be strictly increasing".into()));
        }
        if !(stage_fraction > 0.0 && stage_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!("stage fraction {stage_fraction} outside (0, 1]")));
        }
        Ok(Self { stages, stage_fraction })
    }

    pub fn stages(&self) -> &[u32] {
        &self.stages
    }

    pub fn stage_fraction(&self) -> f64 {
        self.stage_fraction
    }
}

/// Queries until the tally's goodness-of-fit p-value against the uniform
/// distribution drops to `threshold` or below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquarePolicy {
    threshold: f64,
    max_validations: Option<u32>,
}

impl ChiSquarePolicy {
    pub const DEFAULT_THRESHOLD: f64 = 0.05;

    pub fn new(threshold: f64, max_validations: Option<u32>) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidArgument(format!("chi-square threshold {threshold} outside (0, 1)")));
        }
        if max_validations == Some(0) {
            return Err(Error::InvalidArgument("validation cap must be positive".into()));
        }
        Ok(Self { threshold, max_validations })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_validations(&self) -> Option<u32> {
        self.max_validations
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Fixed(FixedPolicy),
    Scheduled(ScheduledPolicy),
    ChiSquare(ChiSquarePolicy),
}

/// The validation count in force once `budget.consumed()` queries are spent.
pub fn current_stage_v(schedule: &ScheduledPolicy, budget: &BudgetLedger) -> u32 {
    let last = schedule.stages.len() - 1;
    let stage = (budget.fraction_consumed() / schedule.stage_fraction + STAGE_EPS).floor();
    schedule.stages[(stage as usize).min(last)]
}

impl Policy {
    /// Why the example should be finalized now, or `None` to keep querying.
    pub fn verdict(&self, tally: &VoteTally, budget: &BudgetLedger) -> Option<FinalizeReason> {
        let total = tally.total();
        let own = match self {
            Policy::Fixed(p) => (total >= u64::from(p.v)).then_some(FinalizeReason::Policy),
            Policy::Scheduled(s) => (total >= u64::from(current_stage_v(s, budget))).then_some(FinalizeReason::Policy),
            Policy::ChiSquare(c) => {
                let rejected = total > 0 && chi_square_p_value(tally).is_ok_and(|p| p <= c.threshold);
                if rejected {
                    Some(FinalizeReason::Policy)
                } else if c.max_validations.is_some_and(|cap| total >= u64::from(cap)) {
                    Some(FinalizeReason::Cap)
                } else {
                    None
                }
            }
        };
        own.or_else(|| (budget.remaining() == 0).then_some(FinalizeReason::Budget))
    }

    pub fn decide(&self, tally: &VoteTally, budget: &BudgetLedger) -> PolicyDecision {
        match self.verdict(tally, budget) {
            Some(_) => PolicyDecision::Finalize,
            None => PolicyDecision::Continue,
        }
    }

    /// Whether decisions depend on how much budget has been spent (other than
    /// running out of it).
    pub fn budget_sensitive(&self) -> bool {
        matches!(self, Policy::Scheduled(_))
    }
}

fn parse_u32(spec: &str, key: &str, value: &str) -> Result<u32> {
    value.trim().parse().map_err(|_| invalid(spec, format!("{key} must be a non-negative integer, got {value:?}")))
}

fn parse_f64(spec: &str, key: &str, value: &str) -> Result<f64> {
    value.trim().parse().map_err(|_| invalid(spec, format!("{key} must be a number, got {value:?}")))
}

fn invalid(spec: &str, reason: impl Into<String>) -> Error {
    Error::InvalidPolicy { spec: spec.to_string(), reason: reason.into() }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (kind, params) = spec.trim().split_once(':').unwrap_or((spec.trim(), ""));
        let mut pairs = Vec::new();
        for item in params.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) =
                item.split_once('=').ok_or_else(|| invalid(spec, format!("expected key=value, got {item:?}")))?;
            pairs.push((k.trim(), v.trim()));
        }
        let known: &[&str] = match kind {
            "fixed" => &["v"],
            "scheduled" => &["stages", "frac"],
            "chi" => &["threshold", "cap"],
            other => return Err(invalid(spec, format!("unknown policy kind {other:?}"))),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !known.contains(k)) {
            return Err(invalid(spec, format!("unknown parameter {k:?} for {kind}")));
        }
        let get = |key: &str| pairs.iter().rev().find(|(k, _)| *k == key).map(|&(_, v)| v);
        let wrap = |e: Error| match e {
            Error::InvalidArgument(reason) => invalid(spec, reason),
            other => other,
        };

        match kind {
            "fixed" => {
                let v = get("v").ok_or_else(|| invalid(spec, "fixed needs v"))?;
                Ok(Policy::Fixed(FixedPolicy::new(parse_u32(spec, "v", v)?).map_err(wrap)?))
            }
            "scheduled" => {
                let stages = get("stages").ok_or_else(|| invalid(spec, "scheduled needs stages"))?;
                let stages = stages.split(',').map(|s| parse_u32(spec, "stages", s)).collect::<Result<Vec<_>>>()?;
                let frac = get("frac").map(|f| parse_f64(spec, "frac", f)).transpose()?;
                Ok(Policy::Scheduled(
                    ScheduledPolicy::new(stages, frac.unwrap_or(ScheduledPolicy::DEFAULT_FRACTION)).map_err(wrap)?,
                ))
            }
            _ => {
                let threshold = get("threshold").map(|t| parse_f64(spec, "threshold", t)).transpose()?;
                let cap = get("cap").map(|c| parse_u32(spec, "cap", c)).transpose()?;
                Ok(Policy::ChiSquare(
                    ChiSquarePolicy::new(
                        threshold.unwrap_or(ChiSquarePolicy::DEFAULT_THRESHOLD),
                        cap.filter(|&c| c > 0),
                    )
                    .map_err(wrap)?,
                ))
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Fixed(p) => write!(f, "fixed:v={}", p.v),
            Policy::Scheduled(s) => {
                let stages: Vec<String> = s.stages.iter().map(u32::to_string).collect();
                write!(f, "scheduled:stages={};frac={}", stages.join(","), s.stage_fraction)
            }
            Policy::ChiSquare(c) => write!(f, "chi:threshold={};cap={}", c.threshold, c.max_validations.unwrap_or(0)),
        }
    }
}

/// Outcome of validating one example.
#[derive(Clone, Debug, PartialEq)]
pub struct Validation {
    pub tally: VoteTally,
    pub label: LabelId,
    pub queries_used: u64,
    pub reason: FinalizeReason,
    /// One label strictly leads the tally; false for tallies like
    /// `[0,0,5,0,0,0,0,0,5,0]` that reject uniformity without a clear winner.
    pub peaked: bool,
}

/// Queries `oracle` about `example` until `policy` finalizes, debiting one
/// budget unit per query, then assigns the majority label.
pub fn validate_example<O: Oracle + ?Sized>(
    policy: &Policy,
    oracle: &O,
    example: &Example,
    budget: &BudgetLedger,
    rng: &mut RandomStream,
) -> Result<Validation> {
    if budget.remaining() == 0 {
        return Err(Error::BudgetExceeded { requested: 1, remaining: 0 });
    }
    let mut tally = VoteTally::new(oracle.classes());
    let reason = loop {
        if let Some(reason) = policy.verdict(&tally, budget) {
            break reason;
        }
        if let Err(e) = budget.try_consume(1) {
            // another holder of a shared ledger took the last unit
            if tally.total() == 0 {
                return Err(e);
            }
            break FinalizeReason::Budget;
        }
        tally.record(oracle.query(example, rng)?);
    };
    let label = majority_vote(&tally, rng)?;
    Ok(Validation { queries_used: tally.total(), peaked: tally.has_unique_mode(), tally, label, reason })
}
