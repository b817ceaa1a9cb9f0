//! Campaign configuration for `simulate`.
//!
//! ```json
//! {
//!   "oracle": { "kind": "uniform", "classes": 10, "noise": 0.4 },
//!   "policy": "chi:threshold=0.05;cap=0",
//!   "s_max": 10000000,
//!   "examples": 100000,
//!   "seed": 7,
//!   "out_dir": "runs/chi-w04"
//! }
//! ```
//!
//! A poker oracle uses `{ "kind": "poker", "p1": "Qh Js", "p2": "7s 7d", "flop": "2s 9s Ts" }`.
//! `classes` defaults to 10. Every other key is required.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use noisy_votes::oracle::UniformNoiseOracle;
use noisy_votes::poker::{parse_cards, Card, PokerOracle};
use noisy_votes::policy::Policy;

use crate::args::SimulateArgs;
use crate::{io_at, CliError, CliResult};

pub const DEFAULT_CLASSES: usize = 10;

/// The config file as written, before validation.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub oracle: Option<RawOracle>,
    pub policy: Option<String>,
    pub s_max: Option<u64>,
    pub examples: Option<u64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOracle {
    pub kind: Option<String>,
    pub classes: Option<usize>,
    pub noise: Option<f64>,
    pub p1: Option<String>,
    pub p2: Option<String>,
    pub flop: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleSpec {
    Uniform { classes: usize, noise: f64 },
    Poker { p1: [Card; 2], p2: [Card; 2], flop: [Card; 3] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub oracle: OracleSpec,
    pub policy: Policy,
    pub s_max: u64,
    pub examples: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl RawConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                CliError::Config(inner.to_string())
            } else {
                CliError::Config(format!("{path}: {inner}"))
            }
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(io_at(path)(e).to_string()))?;
        Self::from_json(&text)
    }

    /// Command-line flags take precedence over file values.
    pub fn apply_overrides(&mut self, args: &SimulateArgs) {
        if let Some(p) = &args.policy {
            self.policy = Some(p.clone());
        }
        if let Some(w) = args.noise {
            self.oracle.get_or_insert_with(Default::default).noise = Some(w);
        }
        self.s_max = args.s_max.or(self.s_max);
        self.examples = args.examples.or(self.examples);
        self.seed = args.seed.or(self.seed);
        if let Some(d) = &args.out_dir {
            self.out_dir = Some(d.clone());
        }
    }

    /// Checks every field and reports all problems at once, each prefixed by
    /// its path.
    pub fn validate(&self) -> CliResult<RunConfig> {
        let mut errors = Vec::new();
        let missing = |path: &str, errors: &mut Vec<String>| errors.push(format!("{path}: missing"));

        let oracle = match &self.oracle {
            None => {
                missing("oracle", &mut errors);
                None
            }
            Some(o) => validate_oracle(o, &mut errors),
        };
        let policy = match &self.policy {
            None => {
                missing("policy", &mut errors);
                None
            }
            Some(text) => match text.parse::<Policy>() {
                Ok(p) => Some(p),
                Err(e) => {
                    errors.push(format!("policy: {e}"));
                    None
                }
            },
        };
        let s_max = match self.s_max {
            None => {
                missing("s_max", &mut errors);
                None
            }
            Some(0) => {
                errors.push("s_max: must be at least 1".into());
                None
            }
            Some(s) => Some(s),
        };
        let examples = match self.examples {
            None => {
                missing("examples", &mut errors);
                None
            }
            Some(0) => {
                errors.push("examples: must be at least 1".into());
                None
            }
            Some(n) => Some(n),
        };
        if self.seed.is_none() {
            missing("seed", &mut errors);
        }
        match &self.out_dir {
            None => missing("out_dir", &mut errors),
            Some(d) if d.as_os_str().is_empty() => errors.push("out_dir: empty path".into()),
            Some(d) if d.is_file() => errors.push(format!("out_dir: {} is a file", d.display())),
            Some(_) => {}
        }

        if !errors.is_empty() {
            return Err(CliError::Config(errors.join("\n")));
        }
        Ok(RunConfig {
            oracle: oracle.expect("validated"),
            policy: policy.expect("validated"),
            s_max: s_max.expect("validated"),
            examples: examples.expect("validated"),
            seed: self.seed.expect("validated"),
            out_dir: self.out_dir.clone().expect("validated"),
        })
    }
}

fn validate_oracle(o: &RawOracle, errors: &mut Vec<String>) -> Option<OracleSpec> {
    let unused = |key: &str, present: bool, kind: &str, errors: &mut Vec<String>| {
        if present {
            errors.push(format!("oracle.{key}: not used by the {kind} oracle"));
        }
    };
    match o.kind.as_deref() {
        Some("uniform") => {
            for (key, present) in [("p1", o.p1.is_some()), ("p2", o.p2.is_some()), ("flop", o.flop.is_some())] {
                unused(key, present, "uniform", errors);
            }
            let classes = o.classes.unwrap_or(DEFAULT_CLASSES);
            if classes < 2 {
                errors.push(format!("oracle.classes: need at least 2, got {classes}"));
                return None;
            }
            let Some(noise) = o.noise else {
                errors.push("oracle.noise: missing".into());
                return None;
            };
            match UniformNoiseOracle::new(classes, noise) {
                Ok(_) => Some(OracleSpec::Uniform { classes, noise }),
                Err(e) => {
                    errors.push(format!("oracle.noise: {e}"));
                    None
                }
            }
        }
        Some("poker") => {
            unused("classes", o.classes.is_some(), "poker", errors);
            unused("noise", o.noise.is_some(), "poker", errors);
            let p1 = cards_field::<2>("oracle.p1", o.p1.as_deref(), errors);
            let p2 = cards_field::<2>("oracle.p2", o.p2.as_deref(), errors);
            let flop = cards_field::<3>("oracle.flop", o.flop.as_deref(), errors);
            let (p1, p2, flop) = (p1?, p2?, flop?);
            match PokerOracle::new(p1, p2, flop) {
                Ok(_) => Some(OracleSpec::Poker { p1, p2, flop }),
                Err(e) => {
                    errors.push(format!("oracle: {e}"));
                    None
                }
            }
        }
        Some(other) => {
            errors.push(format!("oracle.kind: unknown kind {other:?}, expected \"uniform\" or \"poker\""));
            None
        }
        None => {
            errors.push("oracle.kind: missing".into());
            None
        }
    }
}

fn cards_field<const N: usize>(path: &str, text: Option<&str>, errors: &mut Vec<String>) -> Option<[Card; N]> {
    let Some(text) = text else {
        errors.push(format!("{path}: missing"));
        return None;
    };
    match parse_cards(text) {
        Ok(cards) => match <[Card; N]>::try_from(cards) {
            Ok(arr) => Some(arr),
            Err(cards) => {
                errors.push(format!("{path}: expected {N} cards, got {}", cards.len()));
                None
            }
        },
        Err(e) => {
            errors.push(format!("{path}: {e}"));
            None
        }
    }
}
