//! Robustness of a significant regression-based causal inference to
//! unmeasured confounding, measured by the probability of rejecting the
//! null hypothesis again once the counterfactual rows are added (the PIV).
//!
//! * [`ideal`] evaluates the ideal-sample statistics and the PIV at a belief point.
//! * [`bounds`] bounds the PIV over rectangular belief regions and builds contour grids.
//! * [`oracle`] verifies the closed forms on explicit datasets.

pub mod bounds;
pub mod error;
pub mod fixtures;
pub mod ideal;
pub mod model;
pub mod normal;
pub mod oracle;

pub use bounds::{
    bound_piv, evaluate_grid, robustness_verdict, BeliefRegion, BoundOptions, BoundResult,
    ContourGrid, Interval, Resolution, Verdict,
};
pub use error::{PivError, Result};
pub use ideal::{
    ideal_correlation, ideal_means, ideal_sd, ideal_stats, piv, posterior, power_of_ideal_test,
    prefactor, probit_piv, resolve_threshold, se_ideal,
};
pub use model::{
    CounterfactualBelief, EstimateSign, IdealStats, ObservedStats, PivResult, PosteriorNormal,
    Threshold,
};
pub use normal::{std_normal_cdf, std_normal_quantile};
