//! End-to-end runs of the `nplab` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const JD: &str = r#"
seed = 7
level = 8

[class]
class = "jump_diffusion"
x0 = 100.0
mu = 0.0
sigma = 0.2
lambda = 3.0
law = { kind = "discrete", values = [-0.1, 0.05], probs = [0.5, 0.5] }
"#;

fn nplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nplab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn report(dir: &Path, cmd: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(format!("{cmd}.json"))).unwrap()).unwrap()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "gen.toml", JD);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = nplab(&["--out", out.to_str().unwrap(), "generate", &cfg]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = |d: &Path| std::fs::read(d.join("generate-trajectory.csv")).unwrap();
    assert_eq!(csv(&a), csv(&b));
    let o = nplab(&["--out", b.to_str().unwrap(), "--seed", "8", "generate", &cfg]);
    assert_eq!(code(&o), 0);
    assert_ne!(csv(&a), csv(&b));
}

#[test]
fn zero_portfolio_finds_no_violation() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{JD}\n[portfolio]\nsequence = \"ladder(105, 110)\"\nholdings = [\"const(0)\"]\n\n[harness]\nn = 200\n");
    let cfg = write(dir.path(), "zero.toml", &text);
    let o = nplab(&["--out", dir.path().to_str().unwrap(), "--jobs", "2", "arb-search", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(dir.path(), "arb-search")["verdict"], "no-violation-found");
}

#[test]
fn unexpected_verdict_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{JD}\n[portfolio]\nsequence = \"grid(1)\"\nholdings = [\"const(1)\"]\n\n[harness]\nn = 100\nexpected = \"no-violation-found\"\n"
    );
    let cfg = write(dir.path(), "hold.toml", &text);
    let o = nplab(&["--out", dir.path().to_str().unwrap(), "arb-search", &cfg]);
    assert_eq!(code(&o), 2);
}

#[test]
fn slc_ladder_passes() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
seed = 3
level = 10

[class]
class = "jump_diffusion"
x0 = 100.0
mu = 0.0
sigma = 0.2
lambda = 2.0
law = { kind = "discrete", values = [-0.1, 0.08], probs = [0.5, 0.5] }

[metric]
metric = "skorokhod"
resolution = 1024

[harness]
stopping = "ladder(104, 112)"
target_seed = 5
recipe = "u1+u3+u5"
radius = 5.0
"#;
    let cfg = write(dir.path(), "slc.toml", text);
    let o = nplab(&["--out", dir.path().to_str().unwrap(), "slc-test", &cfg]);
    assert_eq!(code(&o), 0, "{}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "slc-test");
    assert_eq!(r["verdict"], "pass");
    assert!(dir.path().join("slc-test-terms.csv").exists());
}

#[test]
fn metric_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{JD}\n[metric]\nmetric = \"uniform\"\n\n[harness]\ntarget_seed = 9\n");
    let cfg = write(dir.path(), "metric.toml", &text);
    let out = dir.path().to_str().unwrap();
    let o = nplab(&["--out", out, "metric", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let uniform = report(dir.path(), "metric")["result"]["distance"].as_f64().unwrap();
    let o = nplab(&["--out", out, "metric", &cfg, "--metric", "skorokhod", "--warp-res", "256"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let skorokhod = report(dir.path(), "metric")["result"]["distance"].as_f64().unwrap();
    assert!(skorokhod <= uniform + 1e-12);
    let o = nplab(&["--out", out, "metric", &cfg, "--metric", "qv", "--mode", "definitional", "--level", "8"]);
    assert_eq!(code(&o), 1, "d_QV must reject jump paths");
}

#[test]
fn replay_matches_then_detects_config_edits() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{JD}\n[portfolio]\nsequence = \"ladder(104)\"\nholdings = [\"const(1)\", \"const(-1)\"]\n\n[harness]\nn = 150\n");
    let cfg = write(dir.path(), "arb.toml", &text);
    let o = nplab(&["--out", dir.path().to_str().unwrap(), "arb-search", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = dir.path().join("arb-search.json");
    let o = nplab(&["replay", rep.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out["matches"], true);
    assert!(!out["checks"].as_array().unwrap().is_empty());

    write(dir.path(), "arb.toml", &text.replace("n = 150", "n = 151"));
    let o = nplab(&["replay", rep.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hash"));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &JD.replace("sigma = 0.2", "sigma = -0.2"));
    let o = nplab(&["generate", &cfg]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
}
