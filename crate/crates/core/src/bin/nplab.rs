use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use npmarket::runner::{self, CommandKind, MetricArgs, Overrides};

/// Batch runner for trajectory-market experiments.
#[derive(Parser)]
#[command(name = "nplab", version)]
struct Cli {
    /// Root seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Grid level (overrides the config).
    #[arg(long)]
    level: Option<u32>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config (TOML).
    config: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample one trajectory and write it as CSV.
    Generate(ConfigArg),
    /// Itô–Föllmer decomposition of a field along a trajectory.
    Integrate(ConfigArg),
    /// Distance between two trajectories.
    Metric {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        /// Partition level of the QV densities.
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        warp_res: Option<usize>,
        #[arg(long)]
        x: Option<PathBuf>,
        #[arg(long)]
        y: Option<PathBuf>,
    },
    /// Value path of a portfolio.
    PortfolioEval(ConfigArg),
    /// Small-ball frequencies.
    SmallBall(ConfigArg),
    /// Scan a corpus for the NP-arbitrage pattern.
    ArbSearch(ConfigArg),
    /// Joint strong local continuity of a stopping sequence.
    SlcTest(ConfigArg),
    /// Pathwise evaluation on sampled paths.
    Transfer(ConfigArg),
    /// Re-execute the witnesses of a report.
    Replay {
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let mut ov = Overrides {
        seed: cli.seed,
        level: cli.level,
        metric: MetricArgs::default(),
    };
    let (kind, config) = match cli.command {
        Cmd::Replay { report } => {
            return match runner::replay(&report) {
                Ok(r) => {
                    println!("{}", serde_json::to_string_pretty(&r).unwrap());
                    ExitCode::from(if r.matches { 0 } else { 2 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
        Cmd::Generate(c) => (CommandKind::Generate, c.config),
        Cmd::Integrate(c) => (CommandKind::Integrate, c.config),
        Cmd::Metric {
            cfg,
            metric,
            mode,
            level,
            warp_res,
            x,
            y,
        } => {
            ov.metric = MetricArgs {
                metric,
                mode,
                level,
                warp_res,
                x,
                y,
            };
            (CommandKind::Metric, cfg.config)
        }
        Cmd::PortfolioEval(c) => (CommandKind::PortfolioEval, c.config),
        Cmd::SmallBall(c) => (CommandKind::SmallBall, c.config),
        Cmd::ArbSearch(c) => (CommandKind::ArbSearch, c.config),
        Cmd::SlcTest(c) => (CommandKind::SlcTest, c.config),
        Cmd::Transfer(c) => (CommandKind::Transfer, c.config),
    };
    match runner::run(kind, &config, &ov, cli.out.as_deref()) {
        Ok(report) => {
            println!(
                "{}: verdict {} (expected {})",
                kind.name(),
                report.verdict.as_deref().unwrap_or("n/a"),
                report.expected.as_deref().unwrap_or("any")
            );
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
