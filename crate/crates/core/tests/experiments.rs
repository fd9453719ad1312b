use rc_fluct::config::{Centering, DistributionName, ExperimentConfig, TracePath};
use rc_fluct::harness::{run_experiment, verify_wick};
use rc_fluct::model::w_samples;

#[test]
fn identical_across_thread_counts() {
    let cfg = ExperimentConfig::new(48, vec![1, 3], DistributionName::ShiftedExponential, 300, 17);
    let on = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| w_samples(&cfg).unwrap())
    };
    let one = on(1);
    let four = on(4);
    for (a, b) in one.rows.iter().zip(&four.rows) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn gaussian_var_w1_at_256() {
    let cfg = ExperimentConfig::new(256, vec![1], DistributionName::Gaussian, 4000, 1);
    let r = run_experiment(&cfg).unwrap();
    let c = r.comparison("p_1", "p_1").unwrap();
    assert!((c.empirical - 2.0).abs() <= (0.3f64).max(4.0 * c.jackknife_se), "{c:?}");
}

#[test]
fn var_w1_error_does_not_grow_with_n() {
    // Var(w_1) = μ4 − 1 at every n, so the gap is Monte Carlo noise; it
    // must not rise steadily beyond that noise as n doubles.
    let gaps: Vec<(f64, f64)> = [64, 128, 256]
        .into_iter()
        .map(|n| {
            let r = run_experiment(&ExperimentConfig::new(n, vec![1], DistributionName::Gaussian, 4000, 99)).unwrap();
            let c = r.comparison("p_1", "p_1").unwrap().clone();
            ((c.empirical - 2.0).abs(), c.jackknife_se)
        })
        .collect();
    let increasing = gaps.windows(2).all(|w| w[1].0 > w[0].0);
    assert!(!(increasing && gaps[2].0 - gaps[0].0 > 2.0 * gaps[2].1), "{gaps:?}");
}

#[test]
fn non_gaussian_variances_use_mu4() {
    // σ_{1,1} = μ4 − 1: 4/5 for the uniform law, 8 for the shifted exponential.
    for (dist, want) in [(DistributionName::Uniform, 0.8), (DistributionName::ShiftedExponential, 8.0)] {
        let r = run_experiment(&ExperimentConfig::new(128, vec![1], dist, 4000, 4)).unwrap();
        let c = r.comparison("p_1", "p_1").unwrap();
        assert_eq!(c.theoretical, want);
        assert!(c.within, "{dist:?}: {c:?}");
    }
}

#[test]
fn dense_and_fast_reports_match() {
    let base = ExperimentConfig::new(24, vec![1, 2], DistributionName::Gaussian, 100, 8).with_centering(Centering::Empirical);
    let a = run_experiment(&base.clone().with_path(TracePath::Dense)).unwrap();
    let b = run_experiment(&base.with_path(TracePath::Fast)).unwrap();
    for (ra, rb) in a.empirical.covariance.iter().zip(&b.empirical.covariance) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}

#[test]
fn wick_fourth_moment_gaussian() {
    let cfg = ExperimentConfig::new(256, vec![1], DistributionName::Gaussian, 8000, 21);
    let w = verify_wick(&cfg, 4).unwrap();
    assert_eq!(w.expected_exact, "12");
    assert!(w.passes(), "{w:?}");
}

#[test]
fn third_moment_finite_n_bias() {
    // E[w_1³] = E(x² − 1)³ / √n = 8/√n for Gaussian entries: a finite-n
    // offset the limiting value 0 does not see. n = 16 makes it 2.
    let cfg = ExperimentConfig::new(16, vec![1], DistributionName::Gaussian, 20000, 6);
    let w = verify_wick(&cfg, 3).unwrap();
    assert!((w.empirical - 2.0).abs() < 4.0 * w.standard_error, "{w:?}");
}

#[test]
fn monte_carlo_matches_exact_finite_n_covariance() {
    use rc_fluct::model::MomentProfile;
    use rc_fluct::oracle::exact_cov_w;
    use rc_fluct::{Budget, Scalar};

    let n = 6;
    let exact = exact_cov_w(n, 1, 2, &MomentProfile::uniform(12), Budget::ORACLE_DEFAULT).unwrap().to_f64();
    let var2 = exact_cov_w(n, 2, 2, &MomentProfile::uniform(12), Budget::ORACLE_DEFAULT).unwrap().to_f64();
    let r = run_experiment(&ExperimentConfig::new(n, vec![1, 2], DistributionName::Uniform, 20000, 13)).unwrap();
    assert!(r.centering.iter().all(|c| c.record.is_exact()));
    let c12 = r.comparison("p_1", "p_2").unwrap();
    let c22 = r.comparison("p_2", "p_2").unwrap();
    assert!((c12.empirical - exact).abs() < 4.0 * c12.jackknife_se, "{c12:?} vs {exact}");
    assert!((c22.empirical - var2).abs() < 4.0 * c22.jackknife_se, "{c22:?} vs {var2}");
}
