//! Drive an experiment from a TOML config, as the `nplab` binary does, then replay it.

use npmarket::runner::{replay, run, CommandKind, Overrides};
use npmarket::Result;

const CONFIG: &str = r#"
seed = 7
level = 9

[class]
class = "jump_diffusion"
x0 = 100.0
mu = 0.075
sigma = 0.2
lambda = 3.0
law = { kind = "discrete", values = [-0.1, 0.05], probs = [0.5, 0.5] }

[portfolio]
sequence = "ladder(104, 110)"
holdings = ["const(1)", "affine(2, -0.01)", "const(0)"]

[harness]
n = 500
"#;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join(format!("nplab-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let cfg = dir.join("experiment.toml");
    std::fs::write(&cfg, CONFIG)?;
    for kind in [CommandKind::ArbSearch, CommandKind::Transfer] {
        let report = run(kind, &cfg, &Overrides::default(), Some(&dir))?;
        println!(
            "{:<10} verdict {:<24} exit {}  artifacts {:?}",
            kind.name(),
            report.verdict.as_deref().unwrap_or("n/a"),
            report.exit_code(),
            report.artifacts
        );
    }
    let r = replay(&dir.join("arb-search.json"))?;
    println!("replay matches: {} ({} witness checks)", r.matches, r.checks.len());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
