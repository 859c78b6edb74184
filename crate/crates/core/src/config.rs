//! Command-line and config-file parsing.
//!
//! The config file is flat `key = value` text. Keys before the first
//! `[section]` header are shared and apply to every subcommand that knows
//! them; keys under `[run]`, `[oracle]`, ... apply to that subcommand only.
//! `#` and `;` start comments. Command-line flags override file values, and
//! any key no subcommand understands is an error.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::engine::{RunConfig, SettingPolicy, Source};
use crate::observer::{CollapseMode, ObserverParams};
use crate::physics::ParticleKind;
use crate::prob::{parse_rational, ratio_to_f64};
use crate::RationalProb;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BIAS_GRID: &str = "0,1/8,1/4,3/8,1/2,3/4,1";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// `--help` / `--version`; carries the text to print.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("config file line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error("reading config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid value for {key}: {msg}")]
    Value { key: &'static str, msg: String },
}

fn value_err(key: &'static str, e: impl ToString) -> ConfigError {
    ConfigError::Value { key, msg: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (text|csv|json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Run {
        config: RunConfig,
        /// `None` uses the rayon pool; `Some(w)` splits across `w` threads.
        workers: Option<usize>,
        log: Option<PathBuf>,
    },
    Oracle {
        params: ObserverParams,
        mode: CollapseMode,
        source: Source,
    },
    Sweep {
        grid: Vec<RationalProb>,
        mode: CollapseMode,
    },
    Qm {
        kind: ParticleKind,
        angles: [f64; 3],
    },
    CollapseTime {
        n_particles: f64,
        mass_ratio: f64,
    },
    LocalBound,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Run { .. } => "run",
            Self::Oracle { .. } => "oracle",
            Self::Sweep { .. } => "sweep",
            Self::Qm { .. } => "qm",
            Self::CollapseTime { .. } => "collapse-time",
            Self::LocalBound => "local-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(name = "flicker-bell", version, about = "Instruction-set Bell experiment with a biased joint observer")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Monte Carlo run with tallies, rates and the inequality statistic
    Run(RunArgs),
    /// Exact probability table by enumeration
    Oracle(OracleArgs),
    /// Exact inequality statistic over a grid of bias values
    Sweep(SweepArgs),
    /// Quantum same-colour predictions at the device angles
    Qm(QmArgs),
    /// Collapse-time estimate for N particles of a given mass ratio
    CollapseTime(CollapseArgs),
    /// Minimum of the statistic over local deterministic strategies
    LocalBound(CommonArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// text | csv | json
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file with key = value lines
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Probability that flicker is seen as the other wing's solid colour
    #[arg(long)]
    bias: Option<String>,
    /// observer | objective-early | sf-delayed:<seconds>
    #[arg(long)]
    mode: Option<String>,
    /// uniform | fixed:<l>,<r> | weighted:<w11>,...,<w33>
    #[arg(long)]
    settings: Option<String>,
    /// random | fixed:<RGF-token>
    #[arg(long)]
    source: Option<String>,
    /// Split the run over this many threads
    #[arg(long)]
    workers: Option<String>,
    /// Write one line per trial to this file
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    bias: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    source: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated bias values
    #[arg(long = "bias-grid")]
    bias_grid: Option<String>,
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args, Debug)]
struct QmArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// photon | spin-half
    #[arg(long)]
    particle: Option<String>,
    /// Three comma-separated switch angles in degrees
    #[arg(long)]
    angles: Option<String>,
}

#[derive(Args, Debug)]
struct CollapseArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of displaced particles
    n_particles: Option<String>,
    /// Particle mass over nucleon mass
    mass_ratio: Option<String>,
}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("run", &["trials", "seed", "bias", "mode", "settings", "source", "workers", "log", "format", "out"]),
    ("oracle", &["bias", "mode", "source", "format", "out"]),
    ("sweep", &["bias-grid", "mode", "format", "out"]),
    ("qm", &["particle", "angles", "format", "out"]),
    ("collapse-time", &["n-particles", "mass-ratio", "format", "out"]),
    ("local-bound", &["format", "out"]),
];

fn section_keys(name: &str) -> Option<&'static [&'static str]> {
    SECTIONS.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
}

/// Parsed config file, already validated against the known keys.
#[derive(Debug, Default)]
struct ConfigFile {
    shared: BTreeMap<String, String>,
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut file = ConfigFile::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| ConfigError::File { line: line_no, msg };
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header {line:?}")))?
                    .trim();
                if section_keys(name).is_none() {
                    return Err(err(format!("unknown section [{name}]")));
                }
                file.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let known = match &current {
                Some(sec) => section_keys(sec).unwrap_or(&[]).contains(&key.as_str()),
                None => SECTIONS.iter().any(|(_, keys)| keys.contains(&key.as_str())),
            };
            if !known {
                let place = current.as_deref().map(|s| format!(" in [{s}]")).unwrap_or_default();
                return Err(err(format!("unknown key {key:?}{place}")));
            }
            let map = match &current {
                Some(sec) => file.sections.get_mut(sec).expect("section registered"),
                None => &mut file.shared,
            };
            if map.insert(key.clone(), value).is_some() {
                return Err(err(format!("duplicate key {key:?}")));
            }
        }
        Ok(file)
    }

    /// Value for `key` as seen by subcommand `section`.
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|m| m.get(key))
            .or_else(|| self.shared.get(key))
            .map(String::as_str)
    }
}

/// Flag value if given, else the config-file value.
struct Merged<'a> {
    file: &'a ConfigFile,
    section: &'static str,
}

impl Merged<'_> {
    fn pick(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.file.get(self.section, key).map(str::to_string))
    }
}

/// Parses `argv` (without the program name) plus optional config-file text.
/// When `config_text` is `None` and `--config` is given, the file is read.
pub fn parse_config<S: AsRef<str>>(argv: &[S], config_text: Option<&str>) -> Result<CliConfig, ConfigError> {
    let args = std::iter::once("flicker-bell").chain(argv.iter().map(AsRef::as_ref));
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp
        | clap::error::ErrorKind::DisplayVersion
        | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ConfigError::Help(e.to_string()),
        _ => ConfigError::Usage(e.to_string()),
    })?;

    let (section, common) = match &cli.command {
        Sub::Run(a) => ("run", &a.common),
        Sub::Oracle(a) => ("oracle", &a.common),
        Sub::Sweep(a) => ("sweep", &a.common),
        Sub::Qm(a) => ("qm", &a.common),
        Sub::CollapseTime(a) => ("collapse-time", &a.common),
        Sub::LocalBound(a) => ("local-bound", a),
    };
    let file = match (config_text, &common.config) {
        (Some(text), _) => ConfigFile::parse(text)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            ConfigFile::parse(&text)?
        }
        (None, None) => ConfigFile::default(),
    };
    let m = Merged { file: &file, section };

    let format = match m.pick(common.format.clone(), "format") {
        Some(s) => s.parse().map_err(|e| value_err("format", e))?,
        None => OutputFormat::Text,
    };
    let out = common
        .out
        .clone()
        .or_else(|| file.get(section, "out").map(PathBuf::from));

    let command = match cli.command {
        Sub::Run(a) => {
            let trials = match m.pick(a.trials, "trials") {
                Some(s) => parse_count(&s).map_err(|e| value_err("trials", e))?,
                None => DEFAULT_TRIALS,
            };
            if trials == 0 {
                return Err(value_err("trials", "number of trials must be at least 1"));
            }
            let seed = match m.pick(a.seed, "seed") {
                Some(s) => parse_seed(&s).map_err(|e| value_err("seed", e))?,
                None => DEFAULT_SEED,
            };
            let config = RunConfig {
                n_trials: trials,
                seed,
                params: parse_params(m.pick(a.bias, "bias"))?,
                mode: parse_mode(m.pick(a.mode, "mode"))?,
                policy: match m.pick(a.settings, "settings") {
                    Some(s) => s.parse().map_err(|e| value_err("settings", e))?,
                    None => SettingPolicy::default(),
                },
                source: parse_source(m.pick(a.source, "source"))?,
            };
            let workers = match m.pick(a.workers, "workers") {
                Some(s) => {
                    let w: usize = s.trim().parse().map_err(|e| value_err("workers", e))?;
                    if w == 0 {
                        return Err(value_err("workers", "must be at least 1"));
                    }
                    Some(w)
                }
                None => None,
            };
            let log = a.log.or_else(|| file.get(section, "log").map(PathBuf::from));
            Command::Run { config, workers, log }
        }
        Sub::Oracle(a) => Command::Oracle {
            params: parse_params(m.pick(a.bias, "bias"))?,
            mode: parse_mode(m.pick(a.mode, "mode"))?,
            source: parse_source(m.pick(a.source, "source"))?,
        },
        Sub::Sweep(a) => {
            let grid_text = m.pick(a.bias_grid, "bias-grid").unwrap_or_else(|| DEFAULT_BIAS_GRID.to_string());
            let grid = grid_text
                .split(',')
                .map(|p| p.parse::<RationalProb>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| value_err("bias-grid", e))?;
            Command::Sweep {
                grid,
                mode: parse_mode(m.pick(a.mode, "mode"))?,
            }
        }
        Sub::Qm(a) => {
            let kind: ParticleKind = match m.pick(a.particle, "particle") {
                Some(s) => s.parse().map_err(|e| value_err("particle", e))?,
                None => ParticleKind::Photon,
            };
            let angles = match m.pick(a.angles, "angles") {
                Some(s) => {
                    let v = s
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| value_err("angles", e))?;
                    let arr: [f64; 3] = v
                        .try_into()
                        .map_err(|_| value_err("angles", "expected three comma-separated angles"))?;
                    if arr.iter().any(|x| !x.is_finite()) {
                        return Err(value_err("angles", "angles must be finite"));
                    }
                    arr
                }
                None => kind.device_angles(),
            };
            Command::Qm { kind, angles }
        }
        Sub::CollapseTime(a) => {
            let n_particles = match m.pick(a.n_particles, "n-particles") {
                Some(s) => parse_positive(&s).map_err(|e| value_err("n-particles", e))?,
                None => crate::physics::REFERENCE_PARTICLES,
            };
            let mass_ratio = match m.pick(a.mass_ratio, "mass-ratio") {
                Some(s) => parse_positive(&s).map_err(|e| value_err("mass-ratio", e))?,
                None => 1.0,
            };
            Command::CollapseTime { n_particles, mass_ratio }
        }
        Sub::LocalBound(_) => Command::LocalBound,
    };
    Ok(CliConfig { command, format, out })
}

fn parse_params(bias: Option<String>) -> Result<ObserverParams, ConfigError> {
    match bias {
        Some(s) => Ok(ObserverParams::new(s.parse().map_err(|e| value_err("bias", e))?)),
        None => Ok(ObserverParams::default()),
    }
}

fn parse_mode(mode: Option<String>) -> Result<CollapseMode, ConfigError> {
    match mode {
        Some(s) => s.parse().map_err(|e| value_err("mode", e)),
        None => Ok(CollapseMode::default()),
    }
}

fn parse_source(source: Option<String>) -> Result<Source, ConfigError> {
    match source {
        Some(s) => s.parse().map_err(|e| value_err("source", e)),
        None => Ok(Source::default()),
    }
}

/// Integer count: `1000000`, `1_000_000` or an integral `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("expected a non-negative integer, got {s:?}")),
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    match t.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16).map_err(|e| e.to_string()),
        None => t.parse::<u64>().map_err(|e| e.to_string()),
    }
}

/// Positive real written as a float (`1e13`) or a fraction (`1/1836`).
fn parse_positive(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let x = if t.contains('/') {
        ratio_to_f64(parse_rational(t).map_err(|e| e.to_string())?)
    } else {
        t.parse::<f64>().map_err(|e| e.to_string())?
    };
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {s:?}"))
    }
}
