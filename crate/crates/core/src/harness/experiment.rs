use std::io::Write;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::normality::{verify_normality, NormalityDiagnostics, MIN_NORMALITY_SAMPLES};
use super::stats::covariance_matrix;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::model::{w_samples, CenteringRecord, StatisticKind, WSamples};
use crate::output::format_f64;
use crate::scalar::Scalar;
use crate::theory::{min_eigenvalue, sigma};

/// Relative tolerance for variances in the empirical-vs-theory gate.
pub const VARIANCE_REL_TOL: f64 = 0.15;
/// Relative tolerance for off-diagonal covariances.
pub const COVARIANCE_REL_TOL: f64 = 0.20;
/// Standard-error multiple in the gate `max(rel · |σ|, k · SE)`.
pub const SE_MULTIPLE: f64 = 4.0;
/// Significance level of the KS check.
pub const KS_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalBlock {
    pub labels: Vec<String>,
    pub replicates: usize,
    pub means: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub jackknife_se: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoreticalBlock {
    pub labels: Vec<String>,
    pub mu4: String,
    pub covariance: Vec<Vec<f64>>,
    /// Exact rationals as `a/b` strings.
    pub exact: Vec<Vec<String>>,
    pub min_eigenvalue: f64,
}

/// One entry of the empirical-vs-theory gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub row: String,
    pub col: String,
    pub empirical: f64,
    pub jackknife_se: f64,
    pub theoretical: f64,
    pub rel_tol: f64,
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityEntry {
    pub label: String,
    #[serde(flatten)]
    pub diagnostics: NormalityDiagnostics,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Empty when there are fewer replicates than the KS check needs.
    pub normality: Vec<NormalityEntry>,
    pub comparisons: Vec<Comparison>,
    /// Statistics whose limiting variance is zero.
    pub degenerate: Vec<String>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub variance_rel: f64,
    pub covariance_rel: f64,
    pub se_multiple: f64,
    pub ks_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenteringEntry {
    pub label: String,
    #[serde(flatten)]
    pub record: CenteringRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: String,
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub unix_time: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub config: ExperimentConfig,
    pub empirical: EmpiricalBlock,
    pub theoretical: TheoreticalBlock,
    pub diagnostics: Diagnostics,
    pub centering: Vec<CenteringEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

/// Coefficients of a statistic over `w_1, w_2, …`.
fn linear_form(kind: &StatisticKind) -> Vec<(u32, BigRational)> {
    match kind {
        StatisticKind::Power(p) => vec![(*p, BigRational::from_integer(1.into()))],
        StatisticKind::Polynomial(q) => q.terms().map(|(k, a)| (k, a.clone())).collect(),
    }
}

/// Limiting covariance matrix of the given statistics.
pub fn theoretical_covariance(kinds: &[StatisticKind], mu4: &BigRational) -> Result<Vec<Vec<BigRational>>> {
    let forms: Vec<_> = kinds.iter().map(linear_form).collect();
    let mut out = vec![vec![BigRational::zero(); kinds.len()]; kinds.len()];
    for (i, fi) in forms.iter().enumerate() {
        for (j, fj) in forms.iter().enumerate() {
            for (p, a) in fi {
                for (q, b) in fj {
                    out[i][j] += a * b * sigma(*p, *q, mu4)?;
                }
            }
        }
    }
    Ok(out)
}

impl CovarianceReport {
    pub fn all_within_tolerance(&self) -> bool {
        self.diagnostics.comparisons.iter().all(|c| c.within)
            && self.diagnostics.normality.iter().all(|n| n.passes)
    }

    pub fn comparison(&self, row: &str, col: &str) -> Option<&Comparison> {
        self.diagnostics.comparisons.iter().find(|c| c.row == row && c.col == col)
    }

    pub fn to_json(&self, include_meta: bool) -> Result<String> {
        if include_meta || self.meta.is_none() {
            return Ok(serde_json::to_string_pretty(self)?);
        }
        let mut stripped = self.clone();
        stripped.meta = None;
        Ok(serde_json::to_string_pretty(&stripped)?)
    }

    /// One line per upper-triangle entry of the covariance matrix.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "row,col,empirical,jackknife_se,theoretical,tolerance,within")?;
        for c in &self.diagnostics.comparisons {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.row,
                c.col,
                format_f64(c.empirical),
                format_f64(c.jackknife_se),
                format_f64(c.theoretical),
                format_f64(c.tolerance),
                c.within
            )?;
        }
        Ok(())
    }
}

/// Summarize an existing replicate table against the limiting theory.
pub fn summarize(cfg: &ExperimentConfig, samples: &WSamples) -> Result<CovarianceReport> {
    let labels = samples.labels();
    let d = samples.dim();
    let (cov, se) = covariance_matrix(&samples.rows);
    let means = (0..d).map(|i| super::stats::mean(&samples.column(i))).collect();

    let mu4 = cfg.distribution.distribution().moments().mu4()?;
    let exact = theoretical_covariance(&samples.kinds, &mu4)?;
    let theo: Vec<Vec<f64>> = exact.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();

    let mut comparisons = Vec::new();
    for i in 0..d {
        for j in i..d {
            let rel_tol = if i == j { VARIANCE_REL_TOL } else { COVARIANCE_REL_TOL };
            let tolerance = (rel_tol * theo[i][j].abs()).max(SE_MULTIPLE * se[i][j]);
            comparisons.push(Comparison {
                row: labels[i].clone(),
                col: labels[j].clone(),
                empirical: cov[i][j],
                jackknife_se: se[i][j],
                theoretical: theo[i][j],
                rel_tol,
                tolerance,
                within: (cov[i][j] - theo[i][j]).abs() <= tolerance,
            });
        }
    }

    let mut normality = Vec::new();
    if samples.replicates() >= MIN_NORMALITY_SAMPLES {
        for i in 0..d {
            let diagnostics = verify_normality(&samples.column(i), theo[i][i].max(0.0))?;
            normality.push(NormalityEntry {
                label: labels[i].clone(),
                passes: diagnostics.passes(KS_ALPHA),
                diagnostics,
            });
        }
    }

    let degenerate = (0..d).filter(|&i| exact[i][i].is_zero()).map(|i| labels[i].clone()).collect();

    Ok(CovarianceReport {
        config: cfg.clone(),
        empirical: EmpiricalBlock {
            labels: labels.clone(),
            replicates: samples.replicates(),
            means,
            covariance: cov,
            jackknife_se: se,
        },
        theoretical: TheoreticalBlock {
            labels: labels.clone(),
            mu4: mu4.to_string(),
            min_eigenvalue: min_eigenvalue(&theo),
            covariance: theo,
            exact: exact.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
        },
        diagnostics: Diagnostics {
            normality,
            comparisons,
            degenerate,
            tolerances: Tolerances {
                variance_rel: VARIANCE_REL_TOL,
                covariance_rel: COVARIANCE_REL_TOL,
                se_multiple: SE_MULTIPLE,
                ks_alpha: KS_ALPHA,
            },
        },
        centering: labels
            .iter()
            .zip(&samples.centering)
            .map(|(l, r)| CenteringEntry { label: l.clone(), record: r.clone() })
            .collect(),
        meta: None,
    })
}

/// Sample the configured statistics and compare them to the limiting
/// Gaussian family.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CovarianceReport> {
    let start = Instant::now();
    let samples = w_samples(cfg)?;
    let mut report = summarize(cfg, &samples)?;
    report.meta = Some(Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        unix_time: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    });
    Ok(report)
}
