use serde::Serialize;

use super::stats::{excess_kurtosis, ks_distance_normal, ks_p_value, skewness};
use crate::error::{invalid, Result};

/// Minimum sample size for the asymptotic KS p-value.
pub const MIN_NORMALITY_SAMPLES: usize = 500;

/// Shape and goodness-of-fit summary of one statistic against `N(0, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityDiagnostics {
    pub samples: usize,
    pub sigma2: f64,
    pub skewness: f64,
    /// Skewness divided by its null standard error `√(6/R)`.
    pub skewness_z: f64,
    pub excess_kurtosis: f64,
    pub ks_distance: f64,
    pub ks_p_value: f64,
    /// `σ² = 0`: the check reduces to "every sample is zero".
    pub degenerate: bool,
}

impl NormalityDiagnostics {
    /// KS p-value above `alpha`, or all-zero samples in the degenerate case.
    pub fn passes(&self, alpha: f64) -> bool {
        if self.degenerate {
            self.ks_distance == 0.0
        } else {
            self.ks_p_value > alpha
        }
    }
}

/// Skewness, excess kurtosis and the KS test of `samples` against
/// `N(0, sigma2)`. With `sigma2 = 0` the KS distance is the fraction of
/// nonzero samples.
pub fn verify_normality(samples: &[f64], sigma2: f64) -> Result<NormalityDiagnostics> {
    if samples.len() < MIN_NORMALITY_SAMPLES {
        return invalid(format!(
            "normality check needs at least {MIN_NORMALITY_SAMPLES} samples, got {}",
            samples.len()
        ));
    }
    if sigma2.is_nan() || sigma2 < 0.0 {
        return invalid(format!("variance must be nonnegative, got {sigma2}"));
    }
    let r = samples.len();
    let sk = skewness(samples);
    if sigma2 == 0.0 {
        let nonzero = samples.iter().filter(|&&x| x != 0.0).count();
        let d = nonzero as f64 / r as f64;
        return Ok(NormalityDiagnostics {
            samples: r,
            sigma2,
            skewness: sk,
            skewness_z: sk / (6.0 / r as f64).sqrt(),
            excess_kurtosis: excess_kurtosis(samples),
            ks_distance: d,
            ks_p_value: if nonzero == 0 { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let d = ks_distance_normal(samples, sigma2)?;
    Ok(NormalityDiagnostics {
        samples: r,
        sigma2,
        skewness: sk,
        skewness_z: sk / (6.0 / r as f64).sqrt(),
        excess_kurtosis: excess_kurtosis(samples),
        ks_distance: d,
        ks_p_value: ks_p_value(d, r),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::replicate_rng;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn rejects_bad_input() {
        assert!(verify_normality(&[0.0; 499], 1.0).is_err());
        assert!(verify_normality(&[0.0; 500], -1.0).is_err());
        assert!(verify_normality(&[0.0; 500], f64::NAN).is_err());
    }

    #[test]
    fn degenerate_zero() {
        let d = verify_normality(&[0.0; 600], 0.0).unwrap();
        assert!(d.degenerate && d.passes(0.01));
        let mut v = vec![0.0; 600];
        v[3] = 1e-9;
        assert!(!verify_normality(&v, 0.0).unwrap().passes(0.01));
    }

    #[test]
    fn calibration_under_null() {
        let sigma2: f64 = 2.5;
        let normal = Normal::new(0.0, sigma2.sqrt()).unwrap();
        let passes = (0..100u64)
            .filter(|&rep| {
                let mut rng = replicate_rng(2024, rep);
                let xs: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
                verify_normality(&xs, sigma2).unwrap().passes(0.01)
            })
            .count();
        assert!(passes >= 95, "{passes}/100");
    }

    #[test]
    fn gross_mismatch() {
        let mut rng = replicate_rng(5, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        assert!(verify_normality(&xs, 1.0).unwrap().ks_p_value < 1e-6);
    }
}
