//! Experiment configuration shared by the sampler, the harness and the CLI.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, Error, Result};
use crate::model::EntryDistribution;
use crate::theory::PolynomialQ;

/// Built-in entry distributions, all with mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionName {
    Gaussian,
    Rademacher,
    Uniform,
    #[serde(alias = "shifted_exponential")]
    ShiftedExponential,
}

impl DistributionName {
    pub const ALL: [DistributionName; 4] = [
        DistributionName::Gaussian,
        DistributionName::Rademacher,
        DistributionName::Uniform,
        DistributionName::ShiftedExponential,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DistributionName::Gaussian => "gaussian",
            DistributionName::Rademacher => "rademacher",
            DistributionName::Uniform => "uniform",
            DistributionName::ShiftedExponential => "shifted-exponential",
        }
    }

    pub fn distribution(&self) -> EntryDistribution {
        EntryDistribution::builtin(*self)
    }
}

impl FromStr for DistributionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "rademacher" => Ok(Self::Rademacher),
            "uniform" => Ok(Self::Uniform),
            "shifted-exponential" | "exponential" => Ok(Self::ShiftedExponential),
            other => invalid(format!("unknown distribution {other:?}")),
        }
    }
}

/// Algorithm used for `Tr M^{2p}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TracePath {
    /// Repeated dense multiplication.
    Dense,
    /// Dense symmetric eigensolver.
    Spectral,
    /// FFT of the first row.
    #[default]
    Fast,
}

impl FromStr for TracePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dense" => Ok(Self::Dense),
            "spectral" => Ok(Self::Spectral),
            "fast" => Ok(Self::Fast),
            other => invalid(format!("unknown trace path {other:?}")),
        }
    }
}

/// How the expectation subtracted from each trace is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centering {
    /// Exact when the enumeration fits the budget, empirical otherwise.
    #[default]
    Auto,
    Exact,
    Empirical,
}

impl FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "empirical" => Ok(Self::Empirical),
            other => invalid(format!("unknown centering {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => invalid(format!("unknown format {other:?}")),
        }
    }
}

fn default_replicates() -> usize {
    4000
}

/// One Monte Carlo experiment: matrix size, statistics, entry law,
/// replicate count and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: u32,
    /// Exponents `p` of the monomial statistics `w_p`.
    #[serde(default)]
    pub ps: Vec<u32>,
    /// Optional polynomial statistic `w_Q`.
    #[serde(default, rename = "Q_coeffs", alias = "Q", alias = "q_coeffs", skip_serializing_if = "Option::is_none")]
    pub q: Option<PolynomialQ>,
    pub distribution: DistributionName,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trace_path: TracePath,
    #[serde(default)]
    pub centering: Centering,
    /// Overrides the exact-centering budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(n: u32, ps: Vec<u32>, distribution: DistributionName, replicates: usize, seed: u64) -> Self {
        Self {
            n,
            ps,
            q: None,
            distribution,
            replicates,
            seed,
            trace_path: TracePath::Fast,
            centering: Centering::Auto,
            budget: None,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn with_q(mut self, q: PolynomialQ) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_path(mut self, path: TracePath) -> Self {
        self.trace_path = path;
        self
    }

    pub fn with_centering(mut self, centering: Centering) -> Self {
        self.centering = centering;
        self
    }

    /// Budget for exact centering: explicit value, else the environment
    /// override, else the oracle default.
    pub fn budget(&self) -> Budget {
        self.budget
            .map(Budget)
            .unwrap_or_else(|| Budget::from_env_or(Budget::ORACLE_DEFAULT))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid(format!("n must be at least 2, got {}", self.n));
        }
        if self.ps.contains(&0) {
            return invalid("p = 0 is not a statistic: w_0 = (n - n)/sqrt(n) has no fluctuation");
        }
        if self.ps.is_empty() && self.q.is_none() {
            return invalid("config needs at least one exponent or a Q polynomial");
        }
        if self.replicates < 2 {
            return invalid(format!("need at least 2 replicates, got {}", self.replicates));
        }
        Ok(())
    }

    /// Parse JSON, falling back to TOML.
    pub fn from_text(text: &str) -> Result<Self> {
        let cfg: Self = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(json_err) => toml::from_str(text)
                .map_err(|toml_err| Error::Config(format!("not JSON ({json_err}) nor TOML ({toml_err})")))?,
        };
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
