//! Brute-force verification of the closed forms.
//!
//! Explicit ideal samples are built with exact cell moments, fitted by
//! least squares through the normal equations, and compared with the
//! closed-form correlation, the block-inverse formulas, and the
//! prior/likelihood combination. A Monte Carlo retest checks the PIV as a
//! rejection rate.

pub mod dataset;
pub mod linalg;
pub mod monte_carlo;
pub mod ols;

use serde::Serialize;

use crate::error::Result;
use crate::ideal::ideal_correlation;

pub use dataset::{build_exact_dataset, IdealDataset, Provenance, Row, SyntheticSpec};
pub use linalg::Matrix;
pub use monte_carlo::{monte_carlo_piv, monte_carlo_tolerance, simulated_model_piv, MIN_REPS};
pub use ols::{
    bayes_combination_check, block_inverse_check, coefficient_variance_check,
    covariance_form_coefficient, ols_fit, standardized_w_coefficient, OlsFit,
};

/// Standardized OLS coefficient on the exact dataset next to the closed-form correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceCheck {
    pub ols: f64,
    pub closed_form: f64,
    pub relative_error: f64,
}

/// Compares the closed-form ideal correlation with the standardized
/// treatment coefficient fitted on the explicit ideal sample.
pub fn correlation_equivalence(spec: &SyntheticSpec) -> Result<EquivalenceCheck> {
    let dataset = build_exact_dataset(spec)?;
    let ols = standardized_w_coefficient(&dataset)?;
    // R² plays no part in the correlation; any valid value will do
    let stats = spec.observed_stats(0.0)?;
    let closed_form = ideal_correlation(&spec.belief(), &stats)?;
    let scale = closed_form.abs().max(ols.abs());
    let relative_error = if scale == 0.0 {
        0.0
    } else {
        (ols - closed_form).abs() / scale
    };
    Ok(EquivalenceCheck {
        ols,
        closed_form,
        relative_error,
    })
}

pub const EQUIVALENCE_TOLERANCE: f64 = 1e-10;
pub const BLOCK_INVERSE_TOLERANCE: f64 = 1e-9;
pub const BAYES_TOLERANCE: f64 = 1e-10;
pub const VARIANCE_TOLERANCE: f64 = 1e-10;

/// Worst-case errors over a batch of random specs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DeterministicReport {
    pub specs: usize,
    pub max_equivalence_error: f64,
    pub max_covariance_form_error: f64,
    pub max_block_inverse_error: f64,
    pub max_bayes_error: f64,
    pub max_variance_error: f64,
    pub max_normal_equation_residual: f64,
}

impl DeterministicReport {
    pub fn passes(&self) -> bool {
        self.max_equivalence_error <= EQUIVALENCE_TOLERANCE
            && self.max_covariance_form_error <= EQUIVALENCE_TOLERANCE
            && self.max_block_inverse_error <= BLOCK_INVERSE_TOLERANCE
            && self.max_bayes_error <= BAYES_TOLERANCE
            && self.max_variance_error <= VARIANCE_TOLERANCE
            && self.max_normal_equation_residual <= 1e-9
    }
}

/// Runs every exact-moment check on `SyntheticSpec::random(seed)` for each seed.
pub fn run_deterministic_checks(
    seeds: impl IntoIterator<Item = u64>,
) -> Result<DeterministicReport> {
    let mut report = DeterministicReport::default();
    for seed in seeds {
        let spec = SyntheticSpec::random(seed);
        let dataset = build_exact_dataset(&spec)?;
        let eq = correlation_equivalence(&spec)?;
        let fit = ols_fit(&dataset)?;
        let cov_form = covariance_form_coefficient(&dataset)?;
        let w = fit.w_coefficient();
        let cov_err = (w - cov_form).abs() / w.abs().max(cov_form.abs()).max(f64::MIN_POSITIVE);
        let sigma2 = 0.5 + (seed % 7) as f64;

        report.specs += 1;
        report.max_equivalence_error = report.max_equivalence_error.max(eq.relative_error);
        report.max_covariance_form_error = report.max_covariance_form_error.max(cov_err);
        report.max_block_inverse_error = report
            .max_block_inverse_error
            .max(block_inverse_check(&dataset)?);
        report.max_bayes_error = report
            .max_bayes_error
            .max(bayes_combination_check(&dataset)?);
        report.max_variance_error = report
            .max_variance_error
            .max(coefficient_variance_check(&dataset, sigma2)?);
        report.max_normal_equation_residual = report
            .max_normal_equation_residual
            .max(fit.normal_equation_residual);
    }
    Ok(report)
}
