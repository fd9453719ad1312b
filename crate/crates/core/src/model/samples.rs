use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::distribution::{replicate_rng, sample_entries};
use super::matrix::{build_rc, FastTracer, RcMatrix};
use crate::config::{Centering, ExperimentConfig, TracePath};
use crate::budget::power_size;
use crate::error::Result;
use crate::oracle::exact_expected_trace;
use crate::output::format_f64;
use crate::scalar::Scalar;
use crate::theory::PolynomialQ;

/// A column of the replicate table.
#[derive(Debug, Clone, PartialEq)]
pub enum StatisticKind {
    Power(u32),
    Polynomial(PolynomialQ),
}

impl StatisticKind {
    pub fn label(&self) -> String {
        match self {
            StatisticKind::Power(p) => format!("p_{p}"),
            StatisticKind::Polynomial(_) => "Q".to_string(),
        }
    }

    fn exponents(&self) -> Vec<u32> {
        match self {
            StatisticKind::Power(p) => vec![*p],
            StatisticKind::Polynomial(q) => q.terms().map(|(k, _)| k).collect(),
        }
    }

    /// Uncentered statistic from the traces `Tr M^{2k}`, indexed by `k`.
    fn raw(&self, traces: &[f64]) -> f64 {
        match self {
            StatisticKind::Power(p) => traces[*p as usize],
            StatisticKind::Polynomial(q) => q.terms().map(|(k, a)| a.to_f64() * traces[k as usize]).sum(),
        }
    }
}

/// How a column was centered.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CenteringRecord {
    /// Exact finite-n expectation; `exact` is the rational in `a/b` form.
    Exact { value: f64, exact: String },
    /// Mean over the replicates.
    Empirical { mean: f64 },
}

impl CenteringRecord {
    pub fn center(&self) -> f64 {
        match self {
            CenteringRecord::Exact { value, .. } => *value,
            CenteringRecord::Empirical { mean } => *mean,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CenteringRecord::Exact { .. })
    }
}

/// Replicate table of centered, scaled statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct WSamples {
    pub kinds: Vec<StatisticKind>,
    /// `rows[r][i]` is statistic `i` on replicate `r`.
    pub rows: Vec<Vec<f64>>,
    pub centering: Vec<CenteringRecord>,
}

impl WSamples {
    pub fn labels(&self) -> Vec<String> {
        self.kinds.iter().map(StatisticKind::label).collect()
    }

    pub fn replicates(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.kinds.len()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    /// CSV with header `replicate,p_1,…`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "replicate,{}", self.labels().join(","))?;
        for (r, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
            writeln!(out, "{r},{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn traces_for(m: &RcMatrix<f64>, path: TracePath, tracer: &FastTracer<f64>, exps: &[u32]) -> Result<Vec<f64>> {
    let top = *exps.last().expect("nonempty") as usize;
    let mut out = vec![f64::NAN; top + 1];
    let squared: Option<Vec<f64>> = match path {
        TracePath::Fast => Some(tracer.squared_spectrum(m)?),
        TracePath::Spectral => Some(m.eigenvalues_spectral()?.into_iter().map(|l| l * l).collect()),
        TracePath::Dense => None,
    };
    for &k in exps {
        out[k as usize] = if k == 1 {
            m.trace_square_identity()
        } else if let Some(sq) = &squared {
            FastTracer::trace_from_squared(sq, k)
        } else {
            m.trace_power_dense(2 * k as usize)?
        };
    }
    Ok(out)
}

fn exact_center(kind: &StatisticKind, cfg: &ExperimentConfig) -> Result<CenteringRecord> {
    let moments = cfg.distribution.distribution().moments().clone();
    let exact = match kind {
        StatisticKind::Power(p) => exact_expected_trace(cfg.n, *p, &moments, cfg.budget())?,
        StatisticKind::Polynomial(q) => {
            let mut acc = num_rational::BigRational::from_integer(0.into());
            for (k, a) in q.terms() {
                acc += a * exact_expected_trace(cfg.n, k, &moments, cfg.budget())?;
            }
            acc
        }
    };
    Ok(CenteringRecord::Exact { value: exact.to_f64(), exact: exact.to_string() })
}

fn exact_affordable(kind: &StatisticKind, cfg: &ExperimentConfig) -> bool {
    kind.exponents()
        .iter()
        .all(|&k| cfg.budget().allows(power_size(cfg.n as u64, 2 * k)))
}

/// Replicate samples of `w_p = (Tr M^{2p} − center) / √n` for every
/// requested exponent, plus `w_Q` when a polynomial is configured.
///
/// Replicate `r` draws from its own stream of the seeded generator, so the
/// table is identical whatever the thread count. `Tr M²` always uses the
/// identity `Σ x_i²`.
pub fn w_samples(cfg: &ExperimentConfig) -> Result<WSamples> {
    cfg.validate()?;
    let mut kinds: Vec<StatisticKind> = cfg.ps.iter().map(|&p| StatisticKind::Power(p)).collect();
    if let Some(q) = &cfg.q {
        kinds.push(StatisticKind::Polynomial(q.clone()));
    }
    let exps: Vec<u32> = kinds
        .iter()
        .flat_map(StatisticKind::exponents)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let n = cfg.n as usize;
    let dist = cfg.distribution.distribution();
    let tracer = FastTracer::<f64>::new(n);
    let raw: Vec<Vec<f64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(cfg.seed, r);
            let m = build_rc(sample_entries(&dist, n, &mut rng), n)?;
            let traces = traces_for(&m, cfg.trace_path, &tracer, &exps)?;
            Ok(kinds.iter().map(|k| k.raw(&traces)).collect())
        })
        .collect::<Result<_>>()?;

    let mut centering = Vec::with_capacity(kinds.len());
    for (i, kind) in kinds.iter().enumerate() {
        let use_exact = match cfg.centering {
            Centering::Exact => true,
            Centering::Empirical => false,
            Centering::Auto => exact_affordable(kind, cfg),
        };
        centering.push(if use_exact {
            exact_center(kind, cfg)?
        } else {
            let mean = raw.iter().map(|row| row[i]).sum::<f64>() / raw.len() as f64;
            CenteringRecord::Empirical { mean }
        });
    }

    let scale = (n as f64).sqrt();
    let rows = raw
        .into_iter()
        .map(|row| row.iter().zip(&centering).map(|(t, c)| (t - c.center()) / scale).collect())
        .collect();
    Ok(WSamples { kinds, rows, centering })
}
