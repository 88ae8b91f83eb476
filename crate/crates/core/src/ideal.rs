//! Closed-form ideal-sample statistics and the PIV.
//!
//! The ideal sample stacks every observed row with its counterfactual
//! twin, so each subject appears once per arm. Counterfactual rows are
//! assumed to share the within-group variance of the observed rows of the
//! same arm. Inference uses the normal approximation; the formulas are
//! intended for n_ob of roughly 30 or more.

use crate::error::{PivError, Result};
use crate::model::{
    CounterfactualBelief, EstimateSign, IdealStats, ObservedStats, PivResult, PosteriorNormal,
    Threshold,
};
use crate::normal::{std_normal_cdf, std_normal_sf};

/// Ideal-sample arm means (Ȳ_t^id, Ȳ_c^id).
pub fn ideal_means(belief: &CounterfactualBelief, stats: &ObservedStats) -> (f64, f64) {
    let pi = stats.pi;
    let y_t_id = (1.0 - pi) * belief.y_t_un + pi * stats.y_t_ob;
    let y_c_id = pi * belief.y_c_un + (1.0 - pi) * stats.y_c_ob;
    (y_t_id, y_c_id)
}

fn ideal_variance(belief: &CounterfactualBelief, stats: &ObservedStats) -> f64 {
    let pi = stats.pi;
    let (y_t_id, y_c_id) = ideal_means(belief, stats);
    let dt = belief.y_t_un - stats.y_t_ob;
    let dc = belief.y_c_un - stats.y_c_ob;
    let gap = y_t_id - y_c_id;
    0.5 * stats.var_t
        + 0.5 * pi * (1.0 - pi) * (dt * dt + dc * dc)
        + 0.5 * stats.var_c
        + 0.25 * gap * gap
}

/// Standard deviation of the outcome over the whole ideal sample.
pub fn ideal_sd(belief: &CounterfactualBelief, stats: &ObservedStats) -> Result<f64> {
    let sd = ideal_variance(belief, stats).sqrt();
    if sd > 0.0 {
        Ok(sd)
    } else {
        Err(PivError::DegenerateSpread)
    }
}

/// Point-biserial correlation between treatment and outcome in the ideal
/// sample, which is also the standardized treatment coefficient.
pub fn ideal_correlation(belief: &CounterfactualBelief, stats: &ObservedStats) -> Result<f64> {
    let (y_t_id, y_c_id) = ideal_means(belief, stats);
    let sd = ideal_sd(belief, stats)?;
    // both arms hold half the rows, so sd(W) = 0.5
    Ok(0.5 * (y_t_id - y_c_id) / sd)
}

pub fn ideal_stats(belief: &CounterfactualBelief, stats: &ObservedStats) -> Result<IdealStats> {
    let (y_t_id, y_c_id) = ideal_means(belief, stats);
    let sigma_y_id = ideal_sd(belief, stats)?;
    Ok(IdealStats {
        y_t_id,
        y_c_id,
        sigma_y_id,
        r_wy_id: 0.5 * (y_t_id - y_c_id) / sigma_y_id,
    })
}

/// Variance of the standardized coefficient, (1 − R²) / (2 n_ob).
/// Depends only on the observed fit, never on the belief.
pub fn posterior_variance(stats: &ObservedStats) -> f64 {
    (1.0 - stats.r_squared) / (2.0 * stats.n_ob as f64)
}

pub fn posterior(belief: &CounterfactualBelief, stats: &ObservedStats) -> Result<PosteriorNormal> {
    Ok(PosteriorNormal {
        mean: ideal_correlation(belief, stats)?,
        variance: posterior_variance(stats),
    })
}

/// Standard error of the ideal-sample standardized coefficient.
pub fn se_ideal(stats: &ObservedStats) -> f64 {
    posterior_variance(stats).sqrt()
}

/// The factor √(2 n_ob) / √(1 − R²) that turns a standardized effect into a T-ratio.
pub fn prefactor(stats: &ObservedStats) -> f64 {
    (2.0 * stats.n_ob as f64).sqrt() / (1.0 - stats.r_squared).sqrt()
}

/// Threshold on the standardized coefficient: a fixed value passes through,
/// a statistical one becomes the signed C times `se_ideal`.
pub fn resolve_threshold(
    threshold: &Threshold,
    sign: EstimateSign,
    stats: &ObservedStats,
) -> Result<f64> {
    threshold.validate()?;
    threshold.check_sign(sign)?;
    Ok(match *threshold {
        Threshold::Fixed { beta_sharp } => beta_sharp,
        Threshold::Statistical { critical_magnitude } => {
            sign.unit() * critical_magnitude * se_ideal(stats)
        }
    })
}

/// Probit of the PIV for a known ideal-sample correlation, with an
/// explicit prefactor. Used to compare alternative normalizations through
/// the same code path.
pub fn probit_from_correlation(
    r: f64,
    sign: EstimateSign,
    threshold: &Threshold,
    prefactor: f64,
) -> Result<f64> {
    threshold.validate()?;
    threshold.check_sign(sign)?;
    Ok(match (*threshold, sign) {
        (Threshold::Fixed { beta_sharp }, EstimateSign::Positive) => prefactor * (r - beta_sharp),
        (Threshold::Fixed { beta_sharp }, EstimateSign::Negative) => prefactor * (beta_sharp - r),
        (Threshold::Statistical { critical_magnitude }, EstimateSign::Positive) => {
            prefactor * r - critical_magnitude
        }
        (Threshold::Statistical { critical_magnitude }, EstimateSign::Negative) => {
            -critical_magnitude - prefactor * r
        }
    })
}

/// probit(PIV) as a function of the belief.
pub fn probit_piv(
    belief: &CounterfactualBelief,
    stats: &ObservedStats,
    sign: EstimateSign,
    threshold: &Threshold,
) -> Result<f64> {
    let r = ideal_correlation(belief, stats)?;
    probit_from_correlation(r, sign, threshold, prefactor(stats))
}

/// Full PIV evaluation for a known ideal-sample correlation.
pub fn piv_from_correlation(
    r: f64,
    stats: &ObservedStats,
    sign: EstimateSign,
    threshold: &Threshold,
) -> Result<PivResult> {
    let k = prefactor(stats);
    let probit_piv = probit_from_correlation(r, sign, threshold, k)?;
    Ok(PivResult {
        piv: std_normal_cdf(probit_piv),
        probit_piv,
        threshold_value: resolve_threshold(threshold, sign, stats)?,
        t_ratio: k * r,
    })
}

/// Probability that the retest on the ideal sample rejects the null again.
pub fn piv(
    belief: &CounterfactualBelief,
    stats: &ObservedStats,
    sign: EstimateSign,
    threshold: &Threshold,
) -> Result<PivResult> {
    piv_from_correlation(ideal_correlation(belief, stats)?, stats, sign, threshold)
}

/// Power of the one-sided z-test whose rejection region lies beyond the
/// signed critical boundary, when the estimate is distributed as
/// N(effect, se²). Evaluated through the rejection region directly rather
/// than through the probit form.
pub fn power_of_ideal_test(
    effect: f64,
    stats: &ObservedStats,
    sign: EstimateSign,
    critical_magnitude: f64,
) -> f64 {
    let se = se_ideal(stats);
    let boundary = sign.unit() * critical_magnitude * se;
    let z = (boundary - effect) / se;
    match sign {
        EstimateSign::Positive => std_normal_sf(z),
        EstimateSign::Negative => std_normal_cdf(z),
    }
}

/// Limit of the ideal correlation as Ȳ_t^un → ±∞ (the sign follows the direction).
pub fn treated_saturation(stats: &ObservedStats) -> f64 {
    ((1.0 - stats.pi) / (1.0 + stats.pi)).sqrt()
}

/// Magnitude of the ideal correlation limit as Ȳ_c^un → ±∞ (the
/// correlation takes the opposite sign of the direction).
pub fn control_saturation(stats: &ObservedStats) -> f64 {
    (stats.pi / (2.0 - stats.pi)).sqrt()
}
