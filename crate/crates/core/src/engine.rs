//! Monte Carlo runs of the two-wing experiment.
//!
//! Trial `i` of a run draws, in order: left setting, right setting,
//! instruction set, then the perception draws made by
//! [`perceive_joint`]. Fixed policies and fixed sources skip their draws.
//! All draws come from the stream selected by `(seed, i)`.

use std::fmt;
use std::io::{self, Write};
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::model::{sample_instruction_set, Color, InstructionSet, LampBehavior, SwitchPosition};
use crate::observer::{perceive_joint, CollapseMode, ObserverParams, PerceivedPair};
use crate::rng::{StreamFactory, TrialStream};
use crate::{Error, Result};

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Trials per rayon task in [`run_experiment`].
const CHUNK: u64 = 1 << 14;

/// How the two switch settings are chosen each trial.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SettingPolicy {
    #[default]
    UniformIndependent,
    Fixed(SwitchPosition, SwitchPosition),
    /// Probabilities of the nine ordered pairs, row-major by left setting.
    WeightedTable([f64; 9]),
}

impl SettingPolicy {
    pub fn weighted(weights: [f64; 9]) -> Result<Self> {
        let bad = || Error::InvalidSettingPolicy(format!("weights {weights:?}"));
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(bad());
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(bad());
        }
        Ok(Self::WeightedTable(weights))
    }

    fn validate(&self) -> Result<()> {
        if let Self::WeightedTable(w) = self {
            Self::weighted(*w)?;
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (SwitchPosition, SwitchPosition) {
        match *self {
            Self::UniformIndependent => {
                let l = SwitchPosition::ALL[rng.gen_range(0..3)];
                let r = SwitchPosition::ALL[rng.gen_range(0..3)];
                (l, r)
            }
            Self::Fixed(l, r) => (l, r),
            Self::WeightedTable(w) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                // Falls back to the last positive cell when rounding leaves
                // `u` above the accumulated total.
                let mut pick = w.iter().rposition(|&x| x > 0.0).unwrap_or(8);
                for (i, &x) in w.iter().enumerate() {
                    acc += x;
                    if u < acc && x > 0.0 {
                        pick = i;
                        break;
                    }
                }
                (SwitchPosition::ALL[pick / 3], SwitchPosition::ALL[pick % 3])
            }
        }
    }
}

impl fmt::Display for SettingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UniformIndependent => f.write_str("uniform"),
            Self::Fixed(l, r) => write!(f, "fixed:{l},{r}"),
            Self::WeightedTable(w) => {
                f.write_str("weighted:")?;
                for (i, x) in w.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    // Shortest round-trip form keeps the echo re-runnable.
                    write!(f, "{x:?}")?;
                }
                Ok(())
            }
        }
    }
}

/// `uniform`, `fixed:<l>,<r>` or `weighted:<w11>,...,<w33>`.
impl FromStr for SettingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSettingPolicy(s.to_string());
        let t = s.trim();
        if t == "uniform" {
            return Ok(Self::UniformIndependent);
        }
        if let Some(rest) = t.strip_prefix("fixed:") {
            let (l, r) = rest.split_once(',').ok_or_else(bad)?;
            let l = l.parse().map_err(|_| bad())?;
            let r = r.parse().map_err(|_| bad())?;
            return Ok(Self::Fixed(l, r));
        }
        if let Some(rest) = t.strip_prefix("weighted:") {
            let vals: Vec<f64> = rest
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            let w: [f64; 9] = vals.try_into().map_err(|_| bad())?;
            return Self::weighted(w).map_err(|_| bad());
        }
        Err(bad())
    }
}

/// Where instruction sets come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Source {
    #[default]
    /// A uniformly random permutation per trial, shared by both wings.
    RandomPermutations,
    FixedSet(InstructionSet),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RandomPermutations => f.write_str("random"),
            Self::FixedSet(iset) => write!(f, "fixed:{iset}"),
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "random" {
            return Ok(Self::RandomPermutations);
        }
        t.strip_prefix("fixed:")
            .and_then(|tok| tok.parse().ok())
            .map(Self::FixedSet)
            .ok_or_else(|| Error::InvalidSource(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub n_trials: u64,
    pub seed: u64,
    pub params: ObserverParams,
    pub mode: CollapseMode,
    pub policy: SettingPolicy,
    pub source: Source,
}

impl RunConfig {
    pub fn new(n_trials: u64, seed: u64) -> Self {
        Self {
            n_trials,
            seed,
            params: ObserverParams::default(),
            mode: CollapseMode::default(),
            policy: SettingPolicy::default(),
            source: Source::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::ZeroTrials);
        }
        self.policy.validate()?;
        if let CollapseMode::SfDelayed { delay_s } = self.mode {
            CollapseMode::sf_delayed(delay_s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub index: u64,
    pub iset: InstructionSet,
    pub left_setting: SwitchPosition,
    pub right_setting: SwitchPosition,
    pub left_behavior: LampBehavior,
    pub right_behavior: LampBehavior,
    pub perceived: PerceivedPair,
    /// Seconds after measurement at which the flicker was fixed. Non-zero
    /// only for delayed remote collapse.
    pub collapse_delay_s: f64,
}

impl TrialRecord {
    /// One trial-log line: `index,iset,left,right,left_color,right_color`.
    pub fn log_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.index,
            self.iset,
            self.left_setting,
            self.right_setting,
            self.perceived.left,
            self.perceived.right
        )
    }
}

/// Counts keyed by `(left setting, right setting, left colour, right colour)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TallyTable {
    counts: [u64; 36],
    total: u64,
}

impl Default for TallyTable {
    fn default() -> Self {
        Self::new()
    }
}

fn cell(l: SwitchPosition, r: SwitchPosition, lc: Color, rc: Color) -> usize {
    (l.index() * 3 + r.index()) * 4 + lc.index() * 2 + rc.index()
}

impl TallyTable {
    pub fn new() -> Self {
        Self {
            counts: [0; 36],
            total: 0,
        }
    }

    pub fn record(&mut self, trial: &TrialRecord) {
        self.add(trial.left_setting, trial.right_setting, trial.perceived, 1);
    }

    pub fn add(&mut self, l: SwitchPosition, r: SwitchPosition, p: PerceivedPair, n: u64) {
        self.counts[cell(l, r, p.left, p.right)] += n;
        self.total += n;
    }

    pub fn count(&self, l: SwitchPosition, r: SwitchPosition, lc: Color, rc: Color) -> u64 {
        self.counts[cell(l, r, lc, rc)]
    }

    /// Trials run at setting pair `(l, r)`.
    pub fn pair_total(&self, l: SwitchPosition, r: SwitchPosition) -> u64 {
        let base = (l.index() * 3 + r.index()) * 4;
        self.counts[base..base + 4].iter().sum()
    }

    /// Trials at `(l, r)` where both wings were seen in the same colour.
    pub fn pair_same(&self, l: SwitchPosition, r: SwitchPosition) -> u64 {
        self.count(l, r, Color::Red, Color::Red) + self.count(l, r, Color::Green, Color::Green)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Pointwise sum.
    pub fn merge(mut self, other: &TallyTable) -> TallyTable {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        self.total += other.total;
        self
    }

    /// Non-zero cells in key order.
    pub fn iter(&self) -> impl Iterator<Item = ((SwitchPosition, SwitchPosition, Color, Color), u64)> + '_ {
        SwitchPosition::ALL.into_iter().flat_map(move |l| {
            SwitchPosition::ALL.into_iter().flat_map(move |r| {
                Color::ALL.into_iter().flat_map(move |lc| {
                    Color::ALL
                        .into_iter()
                        .map(move |rc| ((l, r, lc, rc), self.count(l, r, lc, rc)))
                })
            })
        })
    }
}

fn trial_from_stream(config: &RunConfig, index: u64, rng: &mut TrialStream) -> TrialRecord {
    let (left_setting, right_setting) = config.policy.sample(rng);
    let iset = match config.source {
        Source::RandomPermutations => sample_instruction_set(rng),
        Source::FixedSet(iset) => iset,
    };
    let left_behavior = iset.resolve(left_setting);
    let right_behavior = iset.resolve(right_setting);
    let perceived = perceive_joint(left_behavior, right_behavior, rng, config.params, config.mode);
    TrialRecord {
        index,
        iset,
        left_setting,
        right_setting,
        left_behavior,
        right_behavior,
        perceived,
        collapse_delay_s: config.mode.delay(),
    }
}

/// Runs trial `index` of `config`. A pure function of `(config, index)`.
pub fn run_trial(config: &RunConfig, index: u64) -> Result<TrialRecord> {
    config.validate()?;
    if index >= config.n_trials {
        return Err(Error::InvalidArgument(format!(
            "trial index {index} out of range for {} trials",
            config.n_trials
        )));
    }
    let mut rng = TrialStream::new(config.seed, index);
    Ok(trial_from_stream(config, index, &mut rng))
}

fn run_range(config: &RunConfig, factory: &StreamFactory, range: Range<u64>) -> TallyTable {
    let mut tally = TallyTable::new();
    for index in range {
        let mut rng = factory.stream(index);
        tally.record(&trial_from_stream(config, index, &mut rng));
    }
    tally
}

/// Tallies every trial of `config` on the rayon pool.
pub fn run_experiment(config: &RunConfig) -> Result<TallyTable> {
    config.validate()?;
    let factory = StreamFactory::new(config.seed);
    let n = config.n_trials;
    let chunks = n.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| run_range(config, &factory, c * CHUNK..((c + 1) * CHUNK).min(n)))
        .reduce(TallyTable::new, |a, b| a.merge(&b)))
}

/// Splits the trials into `workers` contiguous ranges, one OS thread each.
/// `workers == 1` runs on the calling thread.
pub fn run_experiment_partitioned(config: &RunConfig, workers: usize) -> Result<TallyTable> {
    config.validate()?;
    if workers == 0 {
        return Err(Error::InvalidArgument("worker count must be at least 1".into()));
    }
    let factory = StreamFactory::new(config.seed);
    let n = config.n_trials;
    let w = workers as u64;
    let ranges: Vec<Range<u64>> = (0..w).map(|k| (n * k / w)..(n * (k + 1) / w)).collect();
    if workers == 1 {
        return Ok(run_range(config, &factory, 0..n));
    }
    let parts: Vec<TallyTable> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| {
                let factory = &factory;
                scope.spawn(move || run_range(config, factory, range))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    Ok(parts.iter().fold(TallyTable::new(), |acc, t| acc.merge(t)))
}

/// Sequential run that also writes the trial log.
pub fn run_experiment_logged<W: Write>(config: &RunConfig, log: &mut W) -> Result<TallyTable, LogError> {
    config.validate()?;
    let factory = StreamFactory::new(config.seed);
    let mut tally = TallyTable::new();
    for index in 0..config.n_trials {
        let mut rng = factory.stream(index);
        let trial = trial_from_stream(config, index, &mut rng);
        writeln!(log, "{}", trial.log_line())?;
        tally.record(&trial);
    }
    Ok(tally)
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Config(#[from] Error),
    #[error("writing trial log: {0}")]
    Io(#[from] io::Error),
}
