use thiserror::Error;

/// Errors raised by the PIV engine, the bounding search and the oracle checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PivError {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("ideal-sample outcome spread is zero; the correlation is undefined")]
    DegenerateSpread,

    #[error(
        "fixed threshold {beta_sharp} lies on the opposite side of zero from a {sign} estimate"
    )]
    SignMismatch { beta_sharp: f64, sign: &'static str },

    #[error("belief region is empty on the {axis} axis (lo = {lo}, hi = {hi})")]
    EmptyRegion {
        axis: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("region must be finite for grid evaluation")]
    UnboundedRegion,

    #[error("grid of {cells} cells exceeds the cap of {cap}")]
    GridTooLarge { cells: usize, cap: usize },

    #[error("design matrix is singular (pivot ratio {ratio:e})")]
    SingularDesign { ratio: f64 },

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),
}

pub type Result<T, E = PivError> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> PivError {
    PivError::InvalidInput {
        field,
        reason: reason.into(),
    }
}
