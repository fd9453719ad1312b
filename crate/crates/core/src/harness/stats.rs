//! Sample statistics over replicate tables.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample covariance of two equal-length columns.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let s: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    s / (xs.len() as f64 - 1.0)
}

/// Leave-one-out jackknife standard error of [`covariance`]. Each deleted
/// estimate is updated from running sums in O(1).
pub fn jackknife_covariance_se(xs: &[f64], ys: &[f64]) -> f64 {
    let r = xs.len();
    if r < 3 {
        return f64::NAN;
    }
    // Shift by the full-sample means to keep the sums well conditioned.
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (a, b) = (x - mx, y - my);
        sx += a;
        sy += b;
        sxy += a * b;
    }
    let m = (r - 1) as f64;
    let deleted: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let (a, b) = (x - mx, y - my);
            ((sxy - a * b) - (sx - a) * (sy - b) / m) / (m - 1.0)
        })
        .collect();
    let centre = mean(&deleted);
    let ss: f64 = deleted.iter().map(|d| (d - centre).powi(2)).sum();
    (ss * m / r as f64).sqrt()
}

/// Covariance matrix and jackknife standard errors of the columns of
/// `rows`. The matrix is filled from the upper triangle, so it is exactly
/// symmetric.
pub fn covariance_matrix(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = rows.first().map_or(0, Vec::len);
    let cols: Vec<Vec<f64>> = (0..d).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
    let mut cov = vec![vec![0.0; d]; d];
    let mut se = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let c = covariance(&cols[i], &cols[j]);
            let s = jackknife_covariance_se(&cols[i], &cols[j]);
            cov[i][j] = c;
            cov[j][i] = c;
            se[i][j] = s;
            se[j][i] = s;
        }
    }
    (cov, se)
}

/// Sample skewness `m3 / m2^{3/2}` with population moments. Zero for a
/// constant sample.
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    if m2 == 0.0 {
        return 0.0;
    }
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / xs.len() as f64;
    m3 / m2.powf(1.5)
}

/// Sample excess kurtosis `m4 / m2² − 3`. Zero for a constant sample.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    if m2 == 0.0 {
        return 0.0;
    }
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / xs.len() as f64;
    m4 / (m2 * m2) - 3.0
}

/// One-sample Kolmogorov–Smirnov distance against `N(0, sigma2)`.
pub fn ks_distance_normal(xs: &[f64], sigma2: f64) -> Result<f64> {
    if xs.is_empty() {
        return invalid("KS distance of an empty sample");
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = normal.cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Asymptotic p-value of the KS distance `d` for sample size `n`, from the
/// Kolmogorov series `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}` with the usual
/// small-sample adjustment of `λ`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Mean of the row-wise product of the selected columns, with its standard
/// error `sd / √R`.
pub fn mixed_moment(rows: &[Vec<f64>], columns: &[usize]) -> (f64, f64) {
    let prods: Vec<f64> = rows.iter().map(|r| columns.iter().map(|&c| r[c]).product()).collect();
    let m = mean(&prods);
    let r = prods.len() as f64;
    let var = prods.iter().map(|p| (p - m).powi(2)).sum::<f64>() / (r - 1.0);
    (m, (var / r).sqrt())
}
