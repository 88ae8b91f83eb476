//! Published summary statistics for the kindergarten-retention study
//! (ECLS-K, retained vs promoted, reading achievement).

use crate::model::{CounterfactualBelief, EstimateSign, ObservedStats, Threshold};
use crate::oracle::dataset::SyntheticSpec;

pub const RETENTION_R_SQUARED: f64 = 0.36;
pub const RETENTION_N_OB: u64 = 7639;
pub const RETENTION_Y_T_OB: f64 = 36.77;
pub const RETENTION_Y_C_OB: f64 = 45.78;
pub const RETENTION_VAR_T: f64 = 143.26;
pub const RETENTION_VAR_C: f64 = 138.83;
pub const RETENTION_PI: f64 = 0.0617;

/// Grand sample mean as published (rounded).
pub const RETENTION_GRAND_MEAN: f64 = 45.2;

/// Counterfactual control mean implied by a retention effect of −7 for the
/// retained students.
pub const RETENTION_MINUS_SEVEN_ANCHOR: f64 = 43.77;

/// Published multilevel-model estimate and standard error; reference only.
pub const RETENTION_ESTIMATE: f64 = -9.01;
pub const RETENTION_ESTIMATE_SE: f64 = 0.68;

/// Coefficient printed in the expanded probit formula for the study. It
/// equals √n_ob / √(1 − R²), a factor √2 short of the prefactor the
/// published bounds require.
pub const PRINTED_PREFACTOR: f64 = 109.25;

pub fn retention_stats() -> ObservedStats {
    ObservedStats::new(
        RETENTION_R_SQUARED,
        RETENTION_N_OB,
        RETENTION_Y_T_OB,
        RETENTION_Y_C_OB,
        RETENTION_VAR_T,
        RETENTION_VAR_C,
        RETENTION_PI,
    )
    .expect("fixture statistics are valid")
}

pub const RETENTION_SIGN: EstimateSign = EstimateSign::Negative;

pub fn retention_threshold() -> Threshold {
    Threshold::Statistical {
        critical_magnitude: 1.96,
    }
}

/// Treated share whose group sizes stay even at [`SIMULATION_N_OB`].
pub const SIMULATION_PI: f64 = 0.062;
pub const SIMULATION_N_OB: usize = 2000;

/// The study's cell means and variances at a sample size small enough to
/// simulate, with the counterfactual means set to `belief`.
pub fn retention_simulation_spec(belief: CounterfactualBelief) -> SyntheticSpec {
    SyntheticSpec {
        n_ob: SIMULATION_N_OB,
        n_treated: (SIMULATION_PI * SIMULATION_N_OB as f64).round() as usize,
        y_t_ob: RETENTION_Y_T_OB,
        y_c_ob: RETENTION_Y_C_OB,
        y_t_un: belief.y_t_un,
        y_c_un: belief.y_c_un,
        var_t: RETENTION_VAR_T,
        var_c: RETENTION_VAR_C,
        covariates: 0,
        seed: 0,
    }
}

/// Belief whose ideal arm means coincide, given the observed control mean
/// as the counterfactual control mean.
pub fn null_belief(stats: &ObservedStats) -> CounterfactualBelief {
    // with y_c_un = y_c_ob the ideal control mean is y_c_ob itself
    let p = stats.pi;
    CounterfactualBelief {
        y_t_un: (stats.y_c_ob - p * stats.y_t_ob) / (1.0 - p),
        y_c_un: stats.y_c_ob,
    }
}
