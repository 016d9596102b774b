//! TOML experiment configuration.
//!
//! ```toml
//! seed = 7
//! level = 10
//!
//! [class]
//! class = "jump_diffusion"
//! x0 = 100.0
//! mu = 0.0
//! sigma = 0.2
//! lambda = 3.0
//! law = { kind = "discrete", values = [-0.1, 0.05], probs = [0.5, 0.5] }
//!
//! [portfolio]
//! sequence = "ladder(105, 110)"
//! holdings = ["const(1)", "affine(0, 0.01)"]
//!
//! [harness]
//! n = 1000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lab::MutatorSet;
use crate::metrics::MetricSpec;
use crate::models::ClassSampler;
use crate::portfolio::{parse_field, Holding, Portfolio, RebalancedPortfolio, SimplePortfolio};
use crate::stopping::StoppingSequence;

fn one() -> f64 {
    1.0
}

fn ten() -> usize {
    10
}

/// Stopping sequence plus one holding (simple) or one field `field(a,b,c)` (rebalanced) per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioSpec {
    pub sequence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdings: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<String>>,
    #[serde(default)]
    pub v0: f64,
}

impl PortfolioSpec {
    pub fn build(&self) -> Result<Portfolio> {
        let sequence: StoppingSequence = self.sequence.parse()?;
        match (&self.holdings, &self.fields) {
            (Some(h), None) => {
                let holdings = h.iter().map(|s| s.parse::<Holding>()).collect::<Result<Vec<_>>>()?;
                Ok(Portfolio::Simple(SimplePortfolio::new(sequence, holdings, self.v0)?))
            }
            (None, Some(f)) => {
                let fields = f.iter().map(|s| parse_field(s)).collect::<Result<Vec<_>>>()?;
                Ok(Portfolio::Rebalanced(RebalancedPortfolio::new(sequence, fields, self.v0)?))
            }
            _ => Err(Error::param("portfolio", "give exactly one of `holdings` or `fields`")),
        }
    }
}

/// Which operation parameters apply depends on the subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSpec {
    /// Number of Monte Carlo samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Small-ball radii.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    /// Seed of the sampled centre / target / second path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_seed: Option<u64>,
    /// CSV trajectory used as input or target instead of a sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Stopping sequence for `slc-test` (defaults to the portfolio's).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopping: Option<String>,
    /// U-set tags such as `u1+u2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onset: Option<f64>,
    #[serde(default = "ten")]
    pub terms: usize,
    /// `field(a,b,c)` integrated by `integrate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Admissibility bound `A` checked by `portfolio-eval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admissible_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutators: Option<MutatorSet>,
    /// Expected verdict for exit-code gating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub level: u32,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Accept classes that break their sign conditions (positive controls).
    #[serde(default)]
    pub allow_broken_class: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassSampler>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portfolio: Option<PortfolioSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub harness: HarnessSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.horizon, self.level)
    }

    pub fn class(&self) -> Result<&ClassSampler> {
        self.class.as_ref().ok_or_else(|| Error::param("class", "this command needs a [class] block"))
    }

    pub fn portfolio(&self) -> Result<Portfolio> {
        self.portfolio
            .as_ref()
            .ok_or_else(|| Error::param("portfolio", "this command needs a [portfolio] block"))?
            .build()
    }

    pub fn metric(&self) -> Result<MetricSpec> {
        self.metric.ok_or_else(|| Error::param("metric", "this command needs a [metric] block"))
    }

    pub fn n(&self) -> Result<usize> {
        match self.harness.n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(Error::param("harness.n", "must be >= 1")),
            None => Err(Error::param("harness.n", "this command needs a sample count")),
        }
    }

    /// Every stated parameter constraint, with the offending field named.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if let Some(class) = &self.class {
            class.validate()?;
            if let (ClassSampler::PoissonExp { params, .. }, false) = (class, self.allow_broken_class) {
                params.validate()?;
            }
        }
        if let Some(p) = &self.portfolio {
            let portfolio = p.build()?;
            if let (Some(ClassSampler::JumpDiffusion(jd)), StoppingSequence::Ladder { .. }) =
                (&self.class, portfolio.sequence())
            {
                jd.class().require_separated()?;
            }
        }
        if let Some(MetricSpec::Skorokhod { resolution, .. }) = self.metric {
            if !resolution.is_power_of_two() || resolution > 1 << self.level {
                return Err(Error::param("metric.resolution", "must be a power of two <= 2^level"));
            }
        }
        if let Some(MetricSpec::Qv { level, .. }) = self.metric {
            if level > self.level {
                return Err(Error::param("metric.level", "must not exceed the grid level"));
            }
        }
        if let Some(r) = self.harness.radius {
            if !(r > 0.0) {
                return Err(Error::param("harness.radius", "must be > 0"));
            }
        }
        if self.harness.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::param("harness.eps", "radii must be > 0"));
        }
        if let Some(a) = self.harness.admissible_bound {
            if !(a >= 0.0) {
                return Err(Error::param("harness.admissible_bound", "must be >= 0"));
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form and the crate version.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        format!("{:x}", h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

[portfolio]
sequence = "ladder(105, 110)"
holdings = ["const(1)", "affine(0, 0.01)"]

[harness]
n = 100
"#;

    #[test]
    fn parses_and_hashes_stably() {
        let c = ExperimentConfig::parse(JD).unwrap();
        assert_eq!(c.n().unwrap(), 100);
        assert!(matches!(c.portfolio().unwrap(), Portfolio::Simple(_)));
        assert_eq!(c.hash(), ExperimentConfig::parse(JD).unwrap().hash());
        let edited = ExperimentConfig::parse(&JD.replace("n = 100", "n = 101")).unwrap();
        assert_ne!(c.hash(), edited.hash());
    }

    #[test]
    fn violations_name_the_field() {
        let bad = JD.replace("lambda = 3.0", "lambda = -1.0");
        let msg = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("lambda"), "{msg}");
        let heston = r#"
seed = 1
level = 6
[class]
class = "heston"
z0 = 100.0
mu = 0.0
alpha = 0.5
k = 1.0
theta = 0.01
xi = 0.5
h = 0.1
v0 = 0.01
"#;
        let msg = ExperimentConfig::parse(heston).unwrap_err().to_string();
        assert!(msg.to_lowercase().contains("feller"), "{msg}");
        let broken = r#"
seed = 1
level = 6
[class]
class = "poisson_exp"
rate = 1.0
params = { x0 = 100.0, mu = 0.1, a = 0.2 }
"#;
        assert!(ExperimentConfig::parse(broken).unwrap_err().to_string().contains("mu * a"));
        assert!(ExperimentConfig::parse(&format!("allow_broken_class = true\n{broken}")).is_ok());
        let unknown = JD.replace("n = 100", "n = 100\nbogus = 1");
        assert!(ExperimentConfig::parse(&unknown).is_err());
    }
}
