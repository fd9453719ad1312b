use num_traits::Zero;
use serde::Serialize;

use super::stats::mixed_moment;
use crate::config::ExperimentConfig;
use crate::error::{invalid, Result};
use crate::model::w_samples;
use crate::scalar::Scalar;
use crate::theory::limiting_mixed_moment;

/// Relative tolerance for even mixed moments.
pub const WICK_EVEN_REL_TOL: f64 = 0.20;
/// Standard-error multiple for odd mixed moments.
pub const WICK_ODD_SE_MULTIPLE: f64 = 4.0;

/// Empirical `E[w_{p_1} ⋯ w_{p_ℓ}]` next to its Gaussian-family value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WickComparison {
    pub ps: Vec<u32>,
    pub replicates: usize,
    pub empirical: f64,
    pub standard_error: f64,
    pub expected: f64,
    pub expected_exact: String,
}

impl WickComparison {
    /// Odd `ℓ`: within 4 SE of zero. Even `ℓ`: within 20% of the expected
    /// value. A zero expectation with zero SE requires an exact zero.
    pub fn passes(&self) -> bool {
        if self.standard_error == 0.0 && self.expected == 0.0 {
            return self.empirical == 0.0;
        }
        if self.ps.len() % 2 == 1 {
            self.empirical.abs() <= WICK_ODD_SE_MULTIPLE * self.standard_error
        } else {
            (self.empirical - self.expected).abs() <= WICK_EVEN_REL_TOL * self.expected.abs()
        }
    }
}

/// Mixed moment of order `l` over the exponents of `cfg.ps`, repeated
/// cyclically to length `l`.
pub fn verify_wick(cfg: &ExperimentConfig, l: usize) -> Result<WickComparison> {
    if cfg.ps.is_empty() {
        return invalid("Wick check needs at least one exponent");
    }
    if l < 2 {
        return invalid(format!("mixed moment order must be at least 2, got {l}"));
    }
    let ps: Vec<u32> = cfg.ps.iter().copied().cycle().take(l).collect();
    let mut distinct = ps.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let mut run = cfg.clone();
    run.ps = distinct.clone();
    run.q = None;
    let samples = w_samples(&run)?;
    let columns: Vec<usize> = ps.iter().map(|p| distinct.binary_search(p).expect("present")).collect();
    let (empirical, standard_error) = mixed_moment(&samples.rows, &columns);

    let mu4 = cfg.distribution.distribution().moments().mu4()?;
    let exact = limiting_mixed_moment(&ps, &mu4)?;
    Ok(WickComparison {
        ps,
        replicates: samples.replicates(),
        empirical,
        standard_error,
        expected: if exact.is_zero() { 0.0 } else { exact.to_f64() },
        expected_exact: exact.to_string(),
    })
}
