//! The acceptance checks, one function per criterion. Each returns a
//! [`CheckOutcome`]; statistical checks get one reseeded retry, which is
//! recorded in the outcome.

use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use super::experiment::{run_experiment, KS_ALPHA};
use super::wick::verify_wick;
use crate::budget::Budget;
use crate::combin::{big_pow, factorial, integer, rational};
use crate::config::{DistributionName, ExperimentConfig};
use crate::error::Result;
use crate::index::{
    cluster_ratio_scan, count_a, count_a_s_closed_form, enumerate_a, limit_ratio, Selection,
};
use crate::model::{build_rc, replicate_rng, sample_entries, w_samples, MomentProfile};
use crate::oracle::exact_cov_w;
use crate::scalar::Scalar;
use crate::theory::{g_function, min_eigenvalue, sigma, sigma_matrix, sigma_q, PolynomialQ};

/// Knobs shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub budget: Budget,
    pub mc_n: u32,
    pub replicates: usize,
    pub wick_replicates: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            budget: Budget::from_env_or(Budget::INDEX_DEFAULT),
            mc_n: 256,
            replicates: 4000,
            wick_replicates: 8000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Set when the first seeded attempt failed and a second seed was used.
    pub retried: bool,
    pub seconds: f64,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.1}s{}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            if self.retried { ", retried" } else { "" },
            self.detail
        )
    }
}

pub const CHECK_IDS: std::ops::RangeInclusive<u8> = 1..=11;

const RETRY_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

fn title(id: u8) -> &'static str {
    match id {
        1 => "closed-form counts match enumeration",
        2 => "partition and reflection identities",
        3 => "count ratios approach their limits",
        4 => "covariance formula identities",
        5 => "trace paths agree",
        6 => "finite-n exact covariances",
        7 => "Monte Carlo covariance and normality",
        8 => "Rademacher degeneracy",
        9 => "Wick moments",
        10 => "cluster scaling",
        11 => "polynomial statistic",
        _ => "unknown check",
    }
}

/// Run one check by number (1 to 11).
pub fn run_check(id: u8, opts: &VerifyOptions) -> CheckOutcome {
    let start = Instant::now();
    let mut retried = false;
    let result = match id {
        1 => closed_form_counts(opts),
        2 => partition_reflection(opts),
        3 => limit_consistency(),
        4 => theory_identities(),
        5 => trace_triangulation(opts.seed),
        6 => finite_n_oracle(),
        7 => with_retry(opts.seed, &mut retried, |s| monte_carlo_clt(opts, s)),
        8 => rademacher_degeneracy(opts),
        9 => with_retry(opts.seed, &mut retried, |s| wick_moments(opts, s)),
        10 => cluster_scaling(opts),
        11 => with_retry(opts.seed, &mut retried, |s| polynomial_statistic(opts, s)),
        _ => Ok((false, format!("no check numbered {id}"))),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome { id, title: title(id), passed, detail, retried, seconds: start.elapsed().as_secs_f64() }
}

/// Every check in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    CHECK_IDS.map(|id| run_check(id, opts)).collect()
}

type Verdict = Result<(bool, String)>;

fn with_retry(seed: u64, retried: &mut bool, mut f: impl FnMut(u64) -> Verdict) -> Verdict {
    let first = f(seed)?;
    if first.0 {
        return Ok(first);
    }
    *retried = true;
    let (ok, detail) = f(seed ^ RETRY_SALT)?;
    Ok((ok, format!("{detail}; first seed failed: {}", first.1)))
}

fn closed_form_counts(opts: &VerifyOptions) -> Verdict {
    let mut cases = 0;
    for n in 1..=8u32 {
        for p in 1..=3u32 {
            for s in -(p as i64 - 1)..=(p as i64 - 1) {
                let formula = count_a_s_closed_form(n as u64, p, s)?;
                let counted = count_a(n, 2 * p as usize, Selection::exact_sum(s), opts.budget)?;
                if formula != BigInt::from(counted) {
                    return Ok((false, format!("n={n} p={p} s={s}: formula {formula}, enumeration {counted}")));
                }
                cases += 1;
            }
        }
    }
    Ok((true, format!("{cases} (n, p, s) cases agree")))
}

fn partition_reflection(opts: &VerifyOptions) -> Verdict {
    for n in 1..=8u32 {
        for p in 1..=3u32 {
            let pi = p as i64;
            let total = BigInt::from(count_a(n, 2 * p as usize, Selection::mod_n(), opts.budget)?);
            let mut sum = BigInt::zero();
            for s in -(pi - 1)..=(pi - 1) {
                let here = count_a_s_closed_form(n as u64, p, s)?;
                if here != count_a_s_closed_form(n as u64, p, -s)? {
                    return Ok((false, format!("reflection fails at n={n} p={p} s={s}")));
                }
                let counted = count_a(n, 2 * p as usize, Selection::exact_sum(s), opts.budget)?;
                if counted != count_a(n, 2 * p as usize, Selection::exact_sum(-s), opts.budget)? {
                    return Ok((false, format!("enumerated reflection fails at n={n} p={p} s={s}")));
                }
                sum += here;
            }
            if sum != total {
                return Ok((false, format!("n={n} p={p}: slices sum to {sum}, mod-n count {total}")));
            }
        }
    }
    Ok((true, "slices partition A_{2p} and are symmetric in s for n <= 8, p <= 3".into()))
}

fn limit_consistency() -> Verdict {
    let n: u64 = 10_000;
    let mut worst: f64 = 0.0;
    for k in 1..=3u32 {
        let scale = BigRational::from_integer(big_pow(n as i64, 2 * k - 1));
        for s in -(k as i64 - 1)..=(k as i64 - 1) {
            let ratio = BigRational::from_integer(count_a_s_closed_form(n, k, s)?) / &scale;
            let limit = limit_ratio(k, s)?;
            let rel = Scalar::to_f64(&((ratio - &limit) / &limit)).abs();
            worst = worst.max(rel);
        }
    }
    Ok((worst < 1e-2, format!("largest relative gap at n = 10^4: {worst:.3e}")))
}

fn theory_identities() -> Verdict {
    for k in 1..=6u32 {
        let kf = BigRational::from_integer(factorial(k as u64));
        let mut sum = BigRational::zero();
        for s in -(k as i64 - 1)..=(k as i64 - 1) {
            sum += limit_ratio(k, s)? * integer(if s == 0 { 1 } else { 2 });
        }
        if g_function(k)? != &kf * &kf * sum {
            return Ok((false, format!("g({k}) disagrees with its limit-ratio form")));
        }
    }
    let mus = [integer(1), rational(9, 5), integer(3), integer(9)];
    for mu4 in &mus {
        if sigma(1, 1, mu4)? != mu4 - BigRational::one() {
            return Ok((false, format!("sigma_11 != mu4 - 1 at mu4 = {mu4}")));
        }
        for p in 1..=6 {
            for q in 1..=6 {
                if sigma(p, q, mu4)? != sigma(q, p, mu4)? {
                    return Ok((false, format!("sigma not symmetric at ({p}, {q})")));
                }
            }
        }
    }
    if sigma(2, 2, &integer(3))? != rational(112, 3) {
        return Ok((false, "sigma_22 at mu4 = 3 is not 112/3".into()));
    }
    let mut lowest = f64::INFINITY;
    for mu4 in &mus {
        for d in 1..=4u32 {
            let ps: Vec<u32> = (1..=d).collect();
            let m: Vec<Vec<f64>> = sigma_matrix(&ps, mu4)?
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64).collect())
                .collect();
            lowest = lowest.min(min_eigenvalue(&m));
        }
    }
    if lowest < -1e-9 {
        return Ok((false, format!("covariance matrix not PSD: eigenvalue {lowest:e}")));
    }
    Ok((true, format!("all identities exact; smallest eigenvalue for d <= 4 is {lowest:.4}")))
}

fn trace_triangulation(seed: u64) -> Verdict {
    let dist = DistributionName::Gaussian.distribution();
    let mut worst: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for (slot, n) in [2usize, 4, 8, 16, 64, 128].into_iter().enumerate() {
        for inst in 0..100u64 {
            let mut rng = replicate_rng(seed, (slot as u64) << 32 | inst);
            let m = build_rc(sample_entries(&dist, n, &mut rng), n)?;
            for two_p in [2, 4, 6] {
                let dense = m.trace_power_dense(two_p)?;
                let spectral = m.trace_power_spectral(two_p)?;
                let fast = m.trace_power_fast(two_p)?;
                for (a, b) in [(dense, spectral), (dense, fast), (fast, spectral)] {
                    worst = worst.max((a - b).abs() / b.abs());
                }
            }
            let sq = m.trace_square_identity();
            for t in [m.trace_power_dense(2)?, m.trace_power_spectral(2)?, m.trace_power_fast(2)?] {
                worst_identity = worst_identity.max((t - sq).abs() / sq);
            }
        }
    }
    if worst >= 1e-8 || worst_identity >= 1e-10 {
        return Ok((false, format!("path gap {worst:.2e}, Tr M^2 identity gap {worst_identity:.2e}")));
    }
    // Exact trace formula at tiny scale, integer entries.
    let mut rng = replicate_rng(seed, u64::MAX);
    for n in 1..=4u32 {
        for p in 1..=2u32 {
            for _ in 0..5 {
                let x: Vec<i64> = (0..n).map(|_| rng.random_range(-5..=5)).collect();
                let m = build_rc(x.iter().map(|&v| integer(v)).collect(), n as usize)?;
                let dense = m.trace_power_dense(2 * p as usize)?;
                let mut sum = BigInt::zero();
                for v in enumerate_a(n, 2 * p as usize, Selection::mod_n(), Budget::INDEX_DEFAULT)? {
                    sum += v.entries().iter().fold(BigInt::one(), |acc, &i| acc * x[i as usize - 1]);
                }
                let formula = BigRational::new(sum, big_pow(n as i64, p - 1));
                if dense != formula {
                    return Ok((false, format!("trace formula fails at n={n} p={p}: {dense} vs {formula}")));
                }
            }
        }
    }
    Ok((
        true,
        format!("path gap {worst:.2e}, Tr M^2 identity gap {worst_identity:.2e}, exact formula holds for n <= 4"),
    ))
}

fn finite_n_oracle() -> Verdict {
    let budget = Budget::ORACLE_DEFAULT;
    let profiles = [
        MomentProfile::gaussian(12),
        MomentProfile::rademacher(12),
        MomentProfile::uniform(12),
        MomentProfile::shifted_exponential(12),
    ];
    for prof in &profiles {
        let want = prof.mu4()? - BigRational::one();
        for n in 1..=8 {
            let got = exact_cov_w(n, 1, 1, prof, budget)?;
            if got != want {
                return Ok((false, format!("Var(w_1) at n={n} is {got}, expected {want}")));
            }
        }
    }
    let target = 112.0 / 3.0;
    let g = &profiles[0];
    let values: Vec<(u32, BigRational)> =
        (2..=6).map(|n| Ok((n, exact_cov_w(n, 2, 2, g, budget)?))).collect::<Result<_>>()?;
    let gaps: Vec<f64> = values.iter().map(|(_, v)| (Scalar::to_f64(v) - target).abs()).collect();
    // Even and odd n approach from different heights; require the gap to
    // shrink within each parity class.
    let trending = gaps.windows(3).all(|w| w[2] < w[0]);
    let listed: Vec<String> = values.iter().map(|(n, v)| format!("n={n}: {v}")).collect();
    Ok((
        trending,
        format!("Var(w_1) = mu4 - 1 for n <= 8; Var(w_2) gaussian {}", listed.join(", ")),
    ))
}

fn monte_carlo_clt(opts: &VerifyOptions, seed: u64) -> Verdict {
    let cfg = ExperimentConfig::new(opts.mc_n, vec![1, 2], DistributionName::Gaussian, opts.replicates, seed);
    let report = run_experiment(&cfg)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in [("p_1", "p_1"), ("p_2", "p_2"), ("p_1", "p_2")] {
        let c = report.comparison(a, b).expect("present");
        ok &= c.within;
        parts.push(format!(
            "Cov({a},{b}) = {:.3} vs {:.3} (tol {:.3})",
            c.empirical, c.theoretical, c.tolerance
        ));
    }
    let ks = &report.diagnostics.normality[0].diagnostics;
    let ks_ok = ks.ks_p_value > KS_ALPHA;
    ok &= ks_ok;
    parts.push(format!("KS p-value for w_1 = {:.3}", ks.ks_p_value));
    Ok((ok, parts.join("; ")))
}

fn rademacher_degeneracy(opts: &VerifyOptions) -> Verdict {
    let cfg = ExperimentConfig::new(opts.mc_n, vec![1], DistributionName::Rademacher, opts.replicates, opts.seed);
    let s = w_samples(&cfg)?;
    let zero = s.column(0).iter().all(|&w| w == 0.0);
    let limit = sigma(1, 1, &integer(1))?;
    Ok((
        zero && limit.is_zero(),
        format!("{} replicates, all zero: {zero}; limiting variance {limit}", s.replicates()),
    ))
}

fn wick_moments(opts: &VerifyOptions, seed: u64) -> Verdict {
    let cfg = ExperimentConfig::new(opts.mc_n, vec![1], DistributionName::Gaussian, opts.wick_replicates, seed);
    let third = verify_wick(&cfg, 3)?;
    let fourth = verify_wick(&cfg, 4)?;
    Ok((
        third.passes() && fourth.passes(),
        format!(
            "E[w_1^3] = {:.4} (SE {:.4}); E[w_1^4] = {:.3} vs {}",
            third.empirical, third.standard_error, fourth.empirical, fourth.expected_exact
        ),
    ))
}

fn cluster_scaling(opts: &VerifyOptions) -> Verdict {
    let pairs = cluster_ratio_scan(&[2, 2], &(2..=10).collect::<Vec<_>>(), opts.budget)?;
    if let Some(bad) = pairs.iter().find(|r| r.count != BigInt::from(r.n)) {
        return Ok((false, format!("|B_(2,2)| = {} at n = {}", bad.count, bad.n)));
    }
    let triples = cluster_ratio_scan(&[2, 2, 2], &(3..=8).collect::<Vec<_>>(), opts.budget)?;
    let decreasing = triples.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let listed: Vec<String> = triples.iter().map(|r| format!("{:.4}", r.ratio)).collect();
    Ok((
        decreasing,
        format!("|B_(2,2)| = n for n in 2..=10; |B_(2,2,2)|/n^1.5 = [{}]", listed.join(", ")),
    ))
}

fn polynomial_statistic(opts: &VerifyOptions, seed: u64) -> Verdict {
    let q: PolynomialQ = "1,1".parse()?;
    let exact = sigma_q(&q, &integer(3))?;
    if exact != rational(166, 3) {
        return Ok((false, format!("sigma_Q = {exact}, expected 166/3")));
    }
    let cfg = ExperimentConfig::new(opts.mc_n, vec![], DistributionName::Gaussian, opts.replicates, seed).with_q(q);
    let report = run_experiment(&cfg)?;
    let c = report.comparison("Q", "Q").expect("present");
    Ok((
        c.within,
        format!("sigma_Q = {exact}; Var(w_Q) = {:.3} (tol {:.3})", c.empirical, c.tolerance),
    ))
}
