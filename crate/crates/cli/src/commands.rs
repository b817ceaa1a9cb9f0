use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use noisy_votes::campaign::{run_campaign, summarize, CampaignResult};
use noisy_votes::idx::{read_idx_images, read_idx_labels, relabel_campaign, write_relabel_outputs, RelabelOutputs};
use noisy_votes::oracle::{Oracle, UniformNoiseOracle};
use noisy_votes::poker::{
    exact_showdown_equity, parse_cards, sample_showdown, Card, Equity, PokerOracle, ShowdownOutcome,
};
use noisy_votes::policy::Policy;
use noisy_votes::stats::{chi_square_test, ChiSquareTest};
use noisy_votes::{Example, LabelId, RandomStream, VoteTally};

use crate::args::{ChiArgs, Command, CurvesArgs, MnistArgs, PokerArgs, PokerCommand, PokerSampleArgs, SimulateArgs};
use crate::config::{OracleSpec, RawConfig, RunConfig};
use crate::curves::{curve_rows, curves_csv, parse_validation_grid};
use crate::{emit, io_at, usage, CliError, CliResult};

pub const CAMPAIGN_CSV: &str = "campaign.csv";
pub const SUMMARY_TXT: &str = "summary.txt";

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Curves(a) => curves(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Poker(PokerCommand::Equity(a)) => poker_equity(&a),
        Command::Poker(PokerCommand::Sample(a)) => poker_sample(&a),
        Command::Chi(a) => chi(&a),
        Command::MnistRelabel(a) => mnist_relabel(&a),
    }
}

fn curves(a: &CurvesArgs) -> CliResult<()> {
    let votes = parse_validation_grid(&a.validations)?;
    let rows = curve_rows(a.classes, &a.noise, &votes, a.trials, a.seed)?;
    emit(a.out.as_deref(), &curves_csv(&rows))
}

/// Builds the example stream for a validated config: ids `0..n`, true label
/// `id mod l` for the uniform oracle and the stronger hand for poker.
pub fn run_config(config: &RunConfig) -> CliResult<CampaignResult> {
    let result = match config.oracle {
        OracleSpec::Uniform { classes, noise } => {
            let oracle = UniformNoiseOracle::new(classes, noise)?;
            let examples: Vec<Example> =
                (0..config.examples).map(|id| Example::new(id, LabelId(id as usize % classes))).collect();
            run_campaign(&oracle, &config.policy, config.s_max, &examples, config.seed)?
        }
        OracleSpec::Poker { p1, p2, flop } => {
            let oracle = PokerOracle::new(p1, p2, flop)?;
            let label = oracle.correct_label();
            let examples: Vec<Example> = (0..config.examples).map(|id| Example::new(id, label)).collect();
            run_campaign(&oracle as &dyn Oracle, &config.policy, config.s_max, &examples, config.seed)?
        }
    };
    Ok(result)
}

/// Writes `campaign.csv` and `summary.txt` under `out_dir`.
pub fn write_campaign(result: &CampaignResult, out_dir: &Path) -> CliResult<()> {
    let mut csv = Vec::new();
    result.write_csv(&mut csv).map_err(io_at(out_dir))?;
    fs::create_dir_all(out_dir).map_err(io_at(out_dir))?;
    let csv_path = out_dir.join(CAMPAIGN_CSV);
    fs::write(&csv_path, csv).map_err(io_at(&csv_path))?;
    let summary_path = out_dir.join(SUMMARY_TXT);
    fs::write(&summary_path, summarize(result).to_string()).map_err(io_at(&summary_path))
}

fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let mut raw = RawConfig::load(&a.config)?;
    raw.apply_overrides(a);
    let config = raw.validate()?;
    // nothing touches the output directory until the campaign has finished
    let result = run_config(&config)?;
    write_campaign(&result, &config.out_dir)?;
    print!("{}", summarize(&result));
    Ok(())
}

/// Seven cards from loose tokens: `--` and `|` separators are skipped and
/// quoted groups such as `"Qh Js"` are split.
pub fn parse_matchup(tokens: &[String]) -> CliResult<([Card; 2], [Card; 2], [Card; 3])> {
    let text: Vec<&str> =
        tokens.iter().flat_map(|t| t.split_whitespace()).filter(|t| *t != "--" && *t != "|").collect();
    let cards = parse_cards(&text.join(" ")).map_err(usage)?;
    if cards.len() != 7 {
        return Err(usage(format!("expected 7 cards (2 + 2 + flop of 3), got {}", cards.len())));
    }
    Ok(([cards[0], cards[1]], [cards[2], cards[3]], [cards[4], cards[5], cards[6]]))
}

fn join(cards: &[Card]) -> String {
    cards.iter().map(Card::to_string).collect::<Vec<_>>().join(" ")
}

pub fn equity_report(p1: [Card; 2], p2: [Card; 2], flop: [Card; 3], eq: &Equity) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p1={}\np2={}\nflop={}", join(&p1), join(&p2), join(&flop));
    let _ = writeln!(s, "rivers={}\np1_wins={}\np2_wins={}\nties={}", eq.rivers, eq.p1_wins, eq.p2_wins, eq.ties);
    let _ = writeln!(s, "p1_share={:.4}\np2_share={:.4}", eq.p1_share(), eq.p2_share());
    s
}

fn poker_equity(a: &PokerArgs) -> CliResult<()> {
    let (p1, p2, flop) = parse_matchup(&a.cards)?;
    let eq = exact_showdown_equity(p1, p2, flop).map_err(usage)?;
    emit(a.out.as_deref(), &equity_report(p1, p2, flop, &eq))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SampleCounts {
    pub p1_wins: u64,
    pub p2_wins: u64,
    pub ties: u64,
}

/// `n` showdowns dealt from one stream of `seed`.
pub fn sample_counts(p1: [Card; 2], p2: [Card; 2], flop: [Card; 3], n: u64, seed: u64) -> CliResult<SampleCounts> {
    let mut rng = RandomStream::derive(seed, 0);
    let mut c = SampleCounts::default();
    for _ in 0..n {
        match sample_showdown(p1, p2, flop, &mut rng)? {
            ShowdownOutcome::P1Wins => c.p1_wins += 1,
            ShowdownOutcome::P2Wins => c.p2_wins += 1,
            ShowdownOutcome::Tie => c.ties += 1,
        }
    }
    Ok(c)
}

fn poker_sample(a: &PokerSampleArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let (p1, p2, flop) = parse_matchup(&a.hands.cards)?;
    let eq = exact_showdown_equity(p1, p2, flop).map_err(usage)?;
    let c = sample_counts(p1, p2, flop, a.n, a.seed)?;
    let n = a.n as f64;
    let mut s = equity_report(p1, p2, flop, &eq);
    let _ = writeln!(
        s,
        "samples={}\nsampled_p1_wins={}\nsampled_p2_wins={}\nsampled_ties={}",
        a.n, c.p1_wins, c.p2_wins, c.ties
    );
    let _ = writeln!(
        s,
        "sampled_p1_share={:.4}\nsampled_p2_share={:.4}",
        (c.p1_wins as f64 + 0.5 * c.ties as f64) / n,
        (c.p2_wins as f64 + 0.5 * c.ties as f64) / n
    );
    emit(a.hands.out.as_deref(), &s)
}

pub fn chi_counts(counts: &[u32]) -> CliResult<ChiSquareTest> {
    let tally = VoteTally::from_counts(counts.to_vec());
    chi_square_test(&tally).map_err(usage)
}

pub fn chi_report(t: &ChiSquareTest) -> String {
    format!("statistic={}\ndf={}\np_value={:.3e}\n", t.statistic, t.degrees_of_freedom, t.p_value)
}

fn chi(a: &ChiArgs) -> CliResult<()> {
    emit(a.out.as_deref(), &chi_report(&chi_counts(&a.counts)?))
}

/// Relabels `labels_path` and writes the label file, provenance and summary.
pub fn mnist_relabel_files(
    images: Option<&Path>,
    labels_path: &Path,
    noise: f64,
    policy: &Policy,
    s_max: u64,
    seed: u64,
    out_dir: &Path,
) -> CliResult<RelabelOutputs> {
    let labels = read_idx_labels(labels_path).map_err(|e| with_path(labels_path, e))?;
    if let Some(path) = images {
        let images = read_idx_images(path).map_err(|e| with_path(path, e))?;
        if images.count() != labels.count() {
            return Err(CliError::Runtime(noisy_votes::Error::Idx(format!(
                "{} images but {} labels",
                images.count(),
                labels.count()
            ))));
        }
    }
    let result = relabel_campaign(&labels, noise, policy, s_max, seed)?;
    Ok(write_relabel_outputs(&result, out_dir)?)
}

fn with_path(path: &Path, e: noisy_votes::Error) -> CliError {
    match e {
        noisy_votes::Error::Io(source) => CliError::Io { path: PathBuf::from(path), source },
        other => CliError::Runtime(noisy_votes::Error::Idx(format!("{}: {other}", path.display()))),
    }
}

fn mnist_relabel(a: &MnistArgs) -> CliResult<()> {
    let policy: Policy = a.policy.parse().map_err(usage)?;
    UniformNoiseOracle::new(noisy_votes::idx::CLASSES, a.noise).map_err(usage)?;
    if a.s_max == 0 {
        return Err(usage("--s-max must be at least 1"));
    }
    let out = mnist_relabel_files(a.images.as_deref(), &a.labels, a.noise, &policy, a.s_max, a.seed, &a.out_dir)?;
    print!("{}", fs::read_to_string(&out.summary).map_err(io_at(&out.summary))?);
    Ok(())
}
