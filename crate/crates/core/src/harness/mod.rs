//! Monte Carlo experiments, their statistical comparison with the limiting
//! theory, and the acceptance checks.

mod experiment;
mod normality;
pub mod stats;
pub mod verify;
mod wick;

pub use experiment::{
    run_experiment, summarize, theoretical_covariance, CenteringEntry, Comparison, CovarianceReport, Diagnostics,
    EmpiricalBlock, Meta, NormalityEntry, TheoreticalBlock, Tolerances, COVARIANCE_REL_TOL, KS_ALPHA, SE_MULTIPLE,
    VARIANCE_REL_TOL,
};
pub use normality::{verify_normality, NormalityDiagnostics, MIN_NORMALITY_SAMPLES};
pub use verify::{run_all, run_check, CheckOutcome, VerifyOptions};
pub use wick::{verify_wick, WickComparison, WICK_EVEN_REL_TOL, WICK_ODD_SE_MULTIPLE};
