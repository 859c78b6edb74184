//! Executes a parsed command and renders its results as text, CSV or JSON.
//!
//! Every renderer works off the same [`Document`]: a config echo, an optional
//! table of rows and a list of summary fields, all in a fixed order. Reports
//! carry no timestamps or host details, so identical configs give
//! byte-identical output.

use std::fs::File;
use std::io::{BufWriter, Write};

use crate::config::{Command, OutputFormat};
use crate::engine::{run_experiment, run_experiment_logged, run_experiment_partitioned, LogError, RunConfig, Source};
use crate::format::fmt_f;
use crate::model::SwitchPosition;
use crate::observer::{CollapseMode, ObserverParams};
use crate::oracle::{coincidence_table_sum, exact_distribution, local_strategy_bound, LocalStrategy, ProbabilityTable, DISTINCT_PAIRS};
use crate::physics::{
    compare_to_thresholds, csl_collapse_time, qm_same_color_probability, CollapseEstimate, ParticleKind, ThresholdFlags,
    THRESHOLD_FAST_S, THRESHOLD_SLOW_S,
};
use crate::stats::{coincidence_rates, exact_marginals, mermin_sum, sweep_bias, CoincidenceStats, InequalityReport, SweepPoint};
use crate::{Error, Rational};

const STATISTIC_LABEL: &str = "same-colour probability summed over setting pairs {1,2} {2,3} {1,3}";

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Results {
    Run {
        config: RunConfig,
        stats: CoincidenceStats,
        /// `None` when some distinct setting pair was never run.
        inequality: Option<InequalityReport>,
    },
    Oracle {
        params: ObserverParams,
        mode: CollapseMode,
        source: Source,
        table: ProbabilityTable,
        inequality: InequalityReport,
    },
    Sweep {
        mode: CollapseMode,
        points: Vec<SweepPoint>,
    },
    Qm {
        kind: ParticleKind,
        angles: [f64; 3],
        probabilities: [[f64; 3]; 3],
    },
    CollapseTime {
        estimate: CollapseEstimate,
        flags: ThresholdFlags,
    },
    LocalBound {
        strategies: Vec<(LocalStrategy, u32)>,
        bound: Rational,
    },
}

/// Runs `command`. A run with a trial log is executed sequentially so the
/// log is written in index order.
pub fn execute(command: &Command) -> Result<Results, LogError> {
    Ok(match command {
        Command::Run { config, workers, log } => {
            let tally = match (log, workers) {
                (Some(path), _) => {
                    let file = File::create(path)?;
                    let mut w = BufWriter::new(file);
                    let t = run_experiment_logged(config, &mut w)?;
                    w.flush()?;
                    t
                }
                (None, Some(w)) => run_experiment_partitioned(config, *w)?,
                (None, None) => run_experiment(config)?,
            };
            let stats = coincidence_rates(&tally)?;
            let inequality = match mermin_sum(&stats) {
                Ok(rep) => Some(rep),
                Err(Error::MissingPairData(..)) => None,
                Err(e) => return Err(e.into()),
            };
            Results::Run {
                config: *config,
                stats,
                inequality,
            }
        }
        Command::Oracle { params, mode, source } => {
            let table = exact_distribution(*params, *mode, *source);
            let inequality = mermin_sum(&table)?;
            Results::Oracle {
                params: *params,
                mode: *mode,
                source: *source,
                table,
                inequality,
            }
        }
        Command::Sweep { grid, mode } => Results::Sweep {
            mode: *mode,
            points: sweep_bias(grid, *mode),
        },
        Command::Qm { kind, angles } => Results::Qm {
            kind: *kind,
            angles: *angles,
            probabilities: std::array::from_fn(|i| {
                std::array::from_fn(|j| qm_same_color_probability(*kind, angles[i], angles[j]))
            }),
        },
        Command::CollapseTime { n_particles, mass_ratio } => {
            let estimate = csl_collapse_time(*n_particles, *mass_ratio)?;
            Results::CollapseTime {
                flags: compare_to_thresholds(&estimate),
                estimate,
            }
        }
        Command::LocalBound => Results::LocalBound {
            strategies: LocalStrategy::all().iter().map(|s| (*s, s.pairwise_same())).collect(),
            bound: local_strategy_bound(),
        },
    })
}

/// Ordered, format-independent content of a report.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub kind: &'static str,
    pub config: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl Document {
    fn new(kind: &'static str) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.summary.push((key.to_string(), value.to_string()));
        self
    }

    fn render_text(&self) -> String {
        let mut out = format!("report: {}\n", self.kind);
        for (k, v) in &self.config {
            out.push_str(&format!("{k}: {v}\n"));
        }
        for row in &self.rows {
            let (head, rest) = row.split_first().expect("non-empty row");
            let cells: Vec<String> = self.columns[1..]
                .iter()
                .zip(rest)
                .map(|(c, v)| format!("{c}={v}"))
                .collect();
            out.push_str(&format!("{} {head}: {}\n", self.columns[0], cells.join(" ")));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("{k}: {v}\n"));
        }
        out
    }

    fn render_csv(&self) -> String {
        let (header, rows): (Vec<&str>, Vec<Vec<String>>) = if self.rows.is_empty() {
            (
                vec!["key", "value"],
                self.summary.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect(),
            )
        } else {
            (self.columns.clone(), self.rows.clone())
        };
        let mut out = header.join(",");
        out.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let q = |s: &str| serde_json::to_string(s).expect("string serializes");
        let object = |pairs: &[(String, String)], indent: &str| -> String {
            if pairs.is_empty() {
                return "{}".to_string();
            }
            let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{indent}  {}: {}", q(k), q(v))).collect();
            format!("{{\n{}\n{indent}}}", body.join(",\n"))
        };
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                let pairs: Vec<(String, String)> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.clone())).collect();
                format!("    {}", object(&pairs, "    "))
            })
            .collect();
        let rows = if rows.is_empty() {
            "[]".to_string()
        } else {
            format!("[\n{}\n  ]", rows.join(",\n"))
        };
        format!(
            "{{\n  \"report\": {},\n  \"config\": {},\n  \"rows\": {},\n  \"summary\": {}\n}}\n",
            q(self.kind),
            object(&self.config, "  "),
            rows,
            object(&self.summary, "  ")
        )
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.render_text(),
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn pair_key(l: SwitchPosition, r: SwitchPosition) -> String {
    format!("{l}-{r}")
}

fn distinct_key(i: usize) -> String {
    let (a, b) = DISTINCT_PAIRS[i];
    format!("same_{a}{b}")
}

fn inequality_fields(doc: &mut Document, rep: &InequalityReport, monte_carlo: bool) {
    doc.field("statistic", STATISTIC_LABEL);
    for (i, s) in rep.per_pair_same.iter().enumerate() {
        doc.field(&distinct_key(i), s);
    }
    doc.field("mermin_sum", rep.mermin_sum);
    if monte_carlo {
        doc.field("mermin_std_err", fmt_f(rep.uncertainty));
        doc.field("significance_k", fmt_f(rep.significance_k));
        doc.field("mermin_upper_edge", fmt_f(rep.upper_edge()));
    }
    doc.field("local_bound", rep.local_bound);
    doc.field("violated", rep.violated);
}

fn rerun_line(parts: &[(&str, String)], command: &str) -> String {
    let mut s = format!("flicker-bell {command}");
    for (flag, value) in parts {
        s.push_str(&format!(" --{flag} {value}"));
    }
    s
}

/// Builds the format-independent document for `results`.
pub fn document(results: &Results) -> Document {
    match results {
        Results::Run { config, stats, inequality } => {
            let mut doc = Document::new("run");
            let echo = [
                ("trials", config.n_trials.to_string()),
                ("seed", config.seed.to_string()),
                ("bias", config.params.p_same_bias.to_string()),
                ("mode", config.mode.to_string()),
                ("settings", config.policy.to_string()),
                ("source", config.source.to_string()),
            ];
            for (k, v) in &echo {
                doc.config(k, v);
            }
            doc.config("rerun", rerun_line(&echo, "run"));
            doc.columns = vec!["pair", "rate", "ci_low", "ci_high"];
            for l in SwitchPosition::ALL {
                for r in SwitchPosition::ALL {
                    if let Some(est) = stats.pair(l, r) {
                        doc.rows.push(vec![
                            pair_key(l, r),
                            fmt_f(est.rate),
                            fmt_f(est.ci_low),
                            fmt_f(est.ci_high),
                        ]);
                    }
                }
            }
            doc.field("n", stats.n)
                .field("overall_coincidence", fmt_f(stats.overall.rate))
                .field("overall_ci_low", fmt_f(stats.overall.ci_low))
                .field("overall_ci_high", fmt_f(stats.overall.ci_high))
                .field("marginal_red_left", fmt_f(stats.marginal_red[0].rate))
                .field("marginal_red_right", fmt_f(stats.marginal_red[1].rate));
            match inequality {
                Some(rep) => inequality_fields(&mut doc, rep, true),
                None => {
                    doc.field("statistic", STATISTIC_LABEL)
                        .field("mermin_sum", "unavailable (a distinct setting pair has no trials)");
                }
            }
            doc
        }
        Results::Oracle {
            params,
            mode,
            source,
            table,
            inequality,
        } => {
            let mut doc = Document::new("oracle");
            let echo = [
                ("bias", params.p_same_bias.to_string()),
                ("mode", mode.to_string()),
                ("source", source.to_string()),
            ];
            for (k, v) in &echo {
                doc.config(k, v);
            }
            doc.config("rerun", rerun_line(&echo, "oracle"));
            doc.columns = vec!["pair", "RR", "RG", "GR", "GG", "coincidence"];
            let mut nine = Rational::from_integer(0);
            for l in SwitchPosition::ALL {
                for r in SwitchPosition::ALL {
                    let p = table.pair(l, r);
                    let c = table.coincidence(l, r);
                    nine += c;
                    let mut row = vec![pair_key(l, r)];
                    row.extend(p.iter().map(|x| x.to_string()));
                    row.push(c.to_string());
                    doc.rows.push(row);
                }
            }
            doc.field("coincidence_sum", nine);
            if let (Source::FixedSet(iset), CollapseMode::ObserverMediated) = (source, mode) {
                debug_assert_eq!(nine, coincidence_table_sum(*params, *iset));
            }
            let m = exact_marginals(table);
            doc.field("marginal_red_left", m[0]).field("marginal_red_right", m[1]);
            doc.field("same_setting_average", table.same_setting_average());
            inequality_fields(&mut doc, inequality, false);
            doc
        }
        Results::Sweep { mode, points } => {
            let mut doc = Document::new("sweep");
            let grid: Vec<String> = points.iter().map(|p| p.p_same_bias.to_string()).collect();
            let echo = [("mode", mode.to_string()), ("bias-grid", grid.join(","))];
            doc.config("mode", &echo[0].1).config("bias_grid", &echo[1].1);
            doc.config("rerun", rerun_line(&echo, "sweep"));
            doc.columns = vec!["p", "mermin_sum", "mermin_sum_decimal", "violated"];
            for p in points {
                doc.rows.push(vec![
                    p.p_same_bias.to_string(),
                    p.mermin_sum.to_string(),
                    fmt_f(crate::prob::ratio_to_f64(p.mermin_sum)),
                    p.violated.to_string(),
                ]);
            }
            doc.field("statistic", STATISTIC_LABEL).field("source", Source::RandomPermutations).field("local_bound", 1);
            doc
        }
        Results::Qm {
            kind,
            angles,
            probabilities,
        } => {
            let mut doc = Document::new("qm");
            let angle_list: Vec<String> = angles.iter().map(|a| fmt_f(*a)).collect();
            let echo = [("particle", kind.to_string()), ("angles", angle_list.join(","))];
            for (k, v) in &echo {
                doc.config(k, v);
            }
            doc.config("rerun", rerun_line(&echo, "qm"));
            doc.columns = vec!["pair", "angle_left", "angle_right", "same_color_probability"];
            for l in SwitchPosition::ALL {
                for r in SwitchPosition::ALL {
                    doc.rows.push(vec![
                        pair_key(l, r),
                        fmt_f(angles[l.index()]),
                        fmt_f(angles[r.index()]),
                        fmt_f(probabilities[l.index()][r.index()]),
                    ]);
                }
            }
            let per: Vec<f64> = DISTINCT_PAIRS
                .iter()
                .map(|(a, b)| probabilities[a.index()][b.index()])
                .collect();
            doc.field("reference", "quantum singlet prediction, right-wing colours reversed");
            doc.field("statistic", STATISTIC_LABEL);
            for (i, p) in per.iter().enumerate() {
                doc.field(&distinct_key(i), fmt_f(*p));
            }
            doc.field("mermin_sum", fmt_f(per.iter().sum())).field("local_bound", 1);
            doc
        }
        Results::CollapseTime { estimate, flags } => {
            let mut doc = Document::new("collapse-time");
            let echo = [
                ("n_particles", fmt_f(estimate.n_particles)),
                ("mass_ratio", fmt_f(estimate.mass_ratio)),
            ];
            for (k, v) in &echo {
                doc.config(k, v);
            }
            doc.config(
                "rerun",
                format!("flicker-bell collapse-time {} {}", echo[0].1, echo[1].1),
            );
            doc.field("collapse_time", format!("{} s", fmt_f(estimate.collapse_time)))
                .field(&format!("exceeds_{}_s", fmt_f(THRESHOLD_FAST_S)), flags.exceeds_fast)
                .field(&format!("exceeds_{}_s", fmt_f(THRESHOLD_SLOW_S)), flags.exceeds_slow);
            doc
        }
        Results::LocalBound { strategies, bound } => {
            let mut doc = Document::new("local-bound");
            doc.config("rerun", "flicker-bell local-bound");
            doc.columns = vec!["strategy", "pairwise_same"];
            for (s, n) in strategies {
                let token: String = s.0.iter().map(|c| c.letter()).collect();
                doc.rows.push(vec![token, n.to_string()]);
            }
            doc.field("statistic", STATISTIC_LABEL).field("local_bound", bound);
            doc
        }
    }
}

/// Renders `results` in `format`.
pub fn emit_report(results: &Results, format: OutputFormat) -> String {
    document(results).render(format)
}
