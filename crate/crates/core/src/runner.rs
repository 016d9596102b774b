//! Subcommand execution: config in, JSON report and CSV records out.
//!
//! Exit codes: 0 when the verdict matches the expectation, 2 when it does
//! not, 1 on configuration or runtime errors (returned as `Err`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::integration::ito_follmer_decomposition;
use crate::lab::{
    calibrate_radius, jointly_slc_test, np_arbitrage_scan, replay_witness, sample_distances, small_ball_sweep_from,
    transfer_experiment, Mutation, NeighborhoodRecipe, RecipeClass,
};
use crate::metrics::{MetricSpec, QvMode, DEFAULT_WARP_BAND};
use crate::models::{derive_seed, ClassSampler};
use crate::portfolio::{check_admissible, check_self_financing, parse_field};
use crate::stopping::StoppingSequence;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Generate,
    Integrate,
    Metric,
    PortfolioEval,
    SmallBall,
    ArbSearch,
    SlcTest,
    Transfer,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Generate => "generate",
            CommandKind::Integrate => "integrate",
            CommandKind::Metric => "metric",
            CommandKind::PortfolioEval => "portfolio-eval",
            CommandKind::SmallBall => "small-ball",
            CommandKind::ArbSearch => "arb-search",
            CommandKind::SlcTest => "slc-test",
            CommandKind::Transfer => "transfer",
        }
    }
}

/// Flags of the `metric` subcommand; each overrides the `[metric]` block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricArgs {
    pub metric: Option<String>,
    pub mode: Option<String>,
    pub level: Option<u32>,
    pub warp_res: Option<usize>,
    pub x: Option<PathBuf>,
    pub y: Option<PathBuf>,
}

/// Command-line overrides, recorded in the report so replays see the same configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub level: Option<u32>,
    #[serde(default)]
    pub metric: MetricArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayWitness {
    pub label: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: CommandKind,
    pub version: String,
    pub config_path: PathBuf,
    pub config_hash: String,
    pub overrides: Overrides,
    pub seed: u64,
    pub level: u32,
    pub verdict: Option<String>,
    pub expected: Option<String>,
    pub verdict_as_expected: bool,
    pub result: Value,
    pub witnesses: Vec<ReplayWitness>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.verdict_as_expected {
            0
        } else {
            2
        }
    }
}

struct Output {
    verdict: Option<String>,
    default_expected: Option<String>,
    result: Value,
    witnesses: Vec<ReplayWitness>,
    csv: Option<(String, Vec<u8>)>,
}

fn effective_config(path: &Path, ov: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(l) = ov.level {
        cfg.level = l;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn input_or_sample(cfg: &ExperimentConfig, seed: u64) -> Result<Trajectory> {
    match &cfg.harness.input {
        Some(p) => Trajectory::read_csv(fs::File::open(p)?),
        None => cfg.class()?.sample(cfg.grid()?, seed),
    }
}

fn csv_bytes<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn metric_spec(cfg: &ExperimentConfig, args: &MetricArgs) -> Result<MetricSpec> {
    let base = cfg.metric;
    let name = match (&args.metric, base) {
        (Some(m), _) => m.clone(),
        (None, Some(b)) => b.name().to_string(),
        (None, None) => return Err(Error::param("metric", "give --metric or a [metric] block")),
    };
    Ok(match name.as_str() {
        "uniform" => MetricSpec::Uniform,
        "skorokhod" => {
            let (res, band) = match base {
                Some(MetricSpec::Skorokhod { resolution, band }) => (resolution, band),
                _ => (1usize << cfg.level.min(10), DEFAULT_WARP_BAND),
            };
            MetricSpec::Skorokhod {
                resolution: args.warp_res.unwrap_or(res),
                band,
            }
        }
        "qv" => {
            let (mode, level) = match base {
                Some(MetricSpec::Qv { mode, level }) => (mode, level),
                _ => (QvMode::Definitional, cfg.level),
            };
            let mode = match args.mode.as_deref() {
                None => mode,
                Some("definitional") => QvMode::Definitional,
                Some("closed") => QvMode::Closed,
                Some(other) => return Err(Error::param("mode", format!("unknown mode `{other}`"))),
            };
            MetricSpec::Qv {
                mode,
                level: args.level.unwrap_or(level),
            }
        }
        other => return Err(Error::param("metric", format!("unknown metric `{other}`"))),
    })
}

fn execute(kind: CommandKind, cfg: &ExperimentConfig, ov: &Overrides) -> Result<Output> {
    let grid = cfg.grid()?;
    let seed = cfg.seed;
    let plain = |result: Value, witnesses: Vec<ReplayWitness>, csv: Option<(String, Vec<u8>)>| Output {
        verdict: None,
        default_expected: None,
        result,
        witnesses,
        csv,
    };
    match kind {
        CommandKind::Generate => {
            let class = cfg.class()?;
            let x = class.sample(grid, seed)?;
            let mut buf = Vec::new();
            x.write_csv(&mut buf)?;
            let qv = x.quadratic_variation(cfg.level)?;
            Ok(plain(
                json!({
                    "class": class.name(),
                    "x0": x.x0(),
                    "terminal": x.terminal(),
                    "max": x.max_value(),
                    "jumps": x.marks().len(),
                    "qv_total": qv.total(),
                    "qv_jump": qv.jump_total(),
                }),
                vec![ReplayWitness {
                    label: "terminal".into(),
                    seed,
                    mutation: None,
                    value: x.terminal(),
                }],
                Some(("trajectory.csv".into(), buf)),
            ))
        }
        CommandKind::Integrate => {
            let x = input_or_sample(cfg, seed)?;
            let field = parse_field(
                cfg.harness
                    .field
                    .as_deref()
                    .ok_or_else(|| Error::param("harness.field", "integrate needs field(a,b,c)"))?,
            )?;
            let r = ito_follmer_decomposition(&field, &x, 0.0, x.horizon(), cfg.level.min(x.level()))?;
            Ok(plain(serde_json::to_value(r)?, vec![], None))
        }
        CommandKind::Metric => {
            let spec = metric_spec(cfg, &ov.metric)?;
            let read = |p: &PathBuf| Trajectory::read_csv(fs::File::open(p)?);
            let x = match &ov.metric.x {
                Some(p) => read(p)?,
                None => input_or_sample(cfg, seed)?,
            };
            let y = match &ov.metric.y {
                Some(p) => read(p)?,
                None => cfg.class()?.sample(
                    x.grid(),
                    cfg.harness
                        .target_seed
                        .ok_or_else(|| Error::param("harness.target_seed", "metric needs --y or a second seed"))?,
                )?,
            };
            Ok(plain(serde_json::to_value(spec.report(&x, &y)?)?, vec![], None))
        }
        CommandKind::PortfolioEval => {
            let p = cfg.portfolio()?;
            let x = input_or_sample(cfg, seed)?;
            let path = p.value(&x, cfg.level.min(x.level()))?;
            let sf = check_self_financing(&p, &x, cfg.level.min(x.level()))?;
            let mut buf = Vec::new();
            path.write_csv(&mut buf)?;
            let admissible = match (cfg.harness.admissible_bound, cfg.harness.n) {
                (Some(a), Some(n)) => Some(check_admissible(&p, cfg.class()?, grid, n, a, seed)?),
                _ => None,
            };
            let witnesses = if cfg.harness.input.is_none() {
                vec![ReplayWitness {
                    label: "terminal_value".into(),
                    seed,
                    mutation: None,
                    value: path.terminal(),
                }]
            } else {
                vec![]
            };
            Ok(plain(
                json!({
                    "v0": p.v0(),
                    "terminal_value": path.terminal(),
                    "min_value": path.min_value().1,
                    "stopping_times": p.sequence().times(&x),
                    "self_financing": sf,
                    "admissibility": admissible,
                }),
                witnesses,
                Some(("value_path.csv".into(), buf)),
            ))
        }
        CommandKind::SmallBall => {
            let class = cfg.class()?;
            let metric = cfg.metric()?;
            let n = cfg.n()?;
            if cfg.harness.eps.is_empty() {
                return Err(Error::param("harness.eps", "small-ball needs at least one radius"));
            }
            let target = match &cfg.harness.input {
                Some(p) => Trajectory::read_csv(fs::File::open(p)?)?,
                None => class.sample(
                    grid,
                    cfg.harness
                        .target_seed
                        .ok_or_else(|| Error::param("harness.target_seed", "small-ball needs a target"))?,
                )?,
            };
            let mut eps = cfg.harness.eps.clone();
            eps.sort_by(f64::total_cmp);
            let d = sample_distances(class, &target, &metric, n, seed)?;
            let sweep = small_ball_sweep_from(&d, &eps)?;
            let positive = sweep.iter().any(|e| e.hits > 0);
            let csv = csv_bytes(
                ["index", "seed", "distance"],
                d.iter()
                    .enumerate()
                    .map(|(i, v)| [i.to_string(), derive_seed(seed, i as u64).to_string(), v.to_string()]),
            )?;
            Ok(Output {
                verdict: Some(if positive { "positive" } else { "zero" }.into()),
                default_expected: None,
                result: json!({
                    "sweep": sweep,
                    "calibrated_eps": calibrate_radius(&sweep, 0.5),
                }),
                witnesses: vec![],
                csv: Some(("distances.csv".into(), csv)),
            })
        }
        CommandKind::ArbSearch => {
            let p = cfg.portfolio()?;
            let class = cfg.class()?;
            let n = cfg.n()?;
            let (v, records) = np_arbitrage_scan(&p, class, grid, cfg.level, n, cfg.harness.mutators.unwrap_or_default(), seed)?;
            let witnesses = [("negative_witness", &v.negative_witness), ("profit_witness", &v.profit_witness)]
                .into_iter()
                .filter_map(|(label, w)| {
                    w.as_ref().map(|w| ReplayWitness {
                        label: label.into(),
                        seed: w.seed,
                        mutation: Some(w.mutation),
                        value: w.terminal_value,
                    })
                })
                .collect();
            let csv = csv_bytes(
                ["path_index", "seed", "mutation", "terminal_value", "min_value", "min_time"],
                records.iter().map(|w| {
                    [
                        w.path_index.to_string(),
                        w.seed.to_string(),
                        serde_json::to_value(w.mutation).unwrap().as_str().unwrap().to_string(),
                        w.terminal_value.to_string(),
                        w.min_value.to_string(),
                        w.min_time.to_string(),
                    ]
                }),
            )?;
            let outcome = serde_json::to_value(v.outcome)?.as_str().unwrap().to_string();
            Ok(Output {
                verdict: Some(outcome),
                default_expected: Some("not:arbitrage-candidate".into()),
                result: serde_json::to_value(&v)?,
                witnesses,
                csv: Some(("records.csv".into(), csv)),
            })
        }
        CommandKind::SlcTest => {
            let class = cfg.class()?;
            let h = &cfg.harness;
            let seq: StoppingSequence = match (&h.stopping, &cfg.portfolio) {
                (Some(s), _) => s.parse()?,
                (None, Some(p)) => p.sequence.parse()?,
                (None, None) => return Err(Error::param("harness.stopping", "slc-test needs a stopping sequence")),
            };
            let center = class.sample(
                grid,
                h.target_seed.ok_or_else(|| Error::param("harness.target_seed", "slc-test needs a centre seed"))?,
            )?;
            let rclass = match class {
                ClassSampler::PoissonExp { params, .. } => RecipeClass::PoissonExp { params: *params },
                ClassSampler::JumpDiffusion(p) => RecipeClass::JumpDiffusion { params: p.class() },
                _ => RecipeClass::StochasticVolatility,
            };
            let constraints = rclass.parse_constraints(h.recipe.as_deref().unwrap_or("u1"))?;
            let recipe = NeighborhoodRecipe::new(
                center,
                rclass,
                cfg.metric()?,
                h.radius.unwrap_or(1.0),
                h.onset.unwrap_or(0.05 * cfg.horizon),
                constraints,
            )?;
            let r = jointly_slc_test(&seq, &recipe, h.terms)?;
            let csv = csv_bytes(
                ["term", "distance", "count", "times"],
                r.rows.iter().map(|row| {
                    let times: Vec<String> = row.times.iter().map(|t| t.to_string()).collect();
                    [row.term.to_string(), row.distance.to_string(), row.count.to_string(), times.join(" ")]
                }),
            )?;
            Ok(Output {
                verdict: Some(if r.passed() { "pass" } else { "fail" }.into()),
                default_expected: Some("pass".into()),
                result: serde_json::to_value(&r)?,
                witnesses: vec![],
                csv: Some(("terms.csv".into(), csv)),
            })
        }
        CommandKind::Transfer => {
            let p = cfg.portfolio()?;
            let class = cfg.class()?;
            let n = cfg.n()?;
            let r = transfer_experiment(&p, class, grid, cfg.level, n, seed)?;
            let gains = crate::lab::terminal_gains(&p, class, grid, cfg.level, n, seed)?;
            let csv = csv_bytes(
                ["index", "seed", "gain"],
                gains
                    .iter()
                    .enumerate()
                    .map(|(i, g)| [i.to_string(), derive_seed(seed, i as u64).to_string(), g.to_string()]),
            )?;
            Ok(Output {
                verdict: Some(if r.consistent { "consistent" } else { "inconsistent" }.into()),
                default_expected: Some("consistent".into()),
                result: serde_json::to_value(&r)?,
                witnesses: vec![],
                csv: Some(("gains.csv".into(), csv)),
            })
        }
    }
}

fn as_expected(verdict: &Option<String>, expected: &Option<String>) -> bool {
    match (verdict, expected) {
        (_, None) => true,
        (None, Some(_)) => true,
        (Some(v), Some(e)) => match e.strip_prefix("not:") {
            Some(neg) => v != neg,
            None => v == e,
        },
    }
}

/// Run `kind` on the config at `config_path`, writing artifacts to `out` (or the config's `out`).
pub fn run(kind: CommandKind, config_path: &Path, ov: &Overrides, out: Option<&Path>) -> Result<Report> {
    let cfg = effective_config(config_path, ov)?;
    let output = execute(kind, &cfg, ov)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("nplab-out"));
    fs::create_dir_all(&dir)?;
    let mut artifacts = vec![];
    if let Some((name, bytes)) = &output.csv {
        let prefixed = format!("{}-{name}", kind.name());
        fs::write(dir.join(&prefixed), bytes)?;
        artifacts.push(prefixed);
    }
    let expected = cfg.harness.expected.clone().or(output.default_expected);
    let report = Report {
        command: kind,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_path: fs::canonicalize(config_path)?,
        config_hash: cfg.hash(),
        overrides: ov.clone(),
        seed: cfg.seed,
        level: cfg.level,
        verdict_as_expected: as_expected(&output.verdict, &expected),
        verdict: output.verdict,
        expected,
        result: output.result,
        witnesses: output.witnesses,
        artifacts,
    };
    let path = dir.join(format!("{}.json", kind.name()));
    fs::write(&path, serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayCheck {
    pub label: String,
    pub recorded: f64,
    pub replayed: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub command: CommandKind,
    pub config_hash: String,
    pub checks: Vec<ReplayCheck>,
    /// Set when the report had no witnesses and the whole result was recomputed.
    pub result_matches: Option<bool>,
    pub matches: bool,
}

/// Re-execute a report's witnesses (or the whole command when it has none).
pub fn replay(report_path: &Path) -> Result<ReplayOutcome> {
    let report: Report = serde_json::from_slice(&fs::read(report_path)?)?;
    let cfg = effective_config(&report.config_path, &report.overrides)?;
    let current = cfg.hash();
    if current != report.config_hash {
        return Err(Error::HashMismatch {
            recorded: report.config_hash,
            current,
        });
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
    let grid = cfg.grid()?;
    let mut checks = vec![];
    for w in &report.witnesses {
        let replayed = match (report.command, w.mutation) {
            (CommandKind::ArbSearch, Some(m)) => replay_witness(&cfg.portfolio()?, cfg.class()?, grid, cfg.level, w.seed, m)?.1,
            (CommandKind::Generate, _) => cfg.class()?.sample(grid, w.seed)?.terminal(),
            (CommandKind::PortfolioEval, _) => cfg.portfolio()?.terminal_value(&cfg.class()?.sample(grid, w.seed)?, cfg.level)?,
            _ => return Err(Error::Parse(format!("witness `{}` cannot be replayed", w.label))),
        };
        checks.push(ReplayCheck {
            label: w.label.clone(),
            recorded: w.value,
            replayed,
            matches: close(w.value, replayed),
        });
    }
    let result_matches = if report.witnesses.is_empty() {
        Some(execute(report.command, &cfg, &report.overrides)?.result == report.result)
    } else {
        None
    };
    let matches = checks.iter().all(|c| c.matches) && result_matches.unwrap_or(true);
    Ok(ReplayOutcome {
        command: report.command,
        config_hash: current,
        checks,
        result_matches,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectation_matching() {
        let s = |v: &str| Some(v.to_string());
        assert!(as_expected(&s("negative-value-witness"), &s("not:arbitrage-candidate")));
        assert!(!as_expected(&s("arbitrage-candidate"), &s("not:arbitrage-candidate")));
        assert!(as_expected(&s("pass"), &s("pass")));
        assert!(!as_expected(&s("fail"), &s("pass")));
        assert!(as_expected(&s("fail"), &None));
    }
}
