//! Domain types shared by the PIV engine, the bounding search and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, PivError, Result};

/// Summary statistics of the observed sample.
///
/// `y_t_ob` and `y_c_ob` are the covariate-adjusted mean outcomes of the
/// observed treated and control subjects; supplying suitably adjusted
/// means is the caller's responsibility. Variances follow the 1/n
/// convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservedStats {
    pub r_squared: f64,
    pub n_ob: u64,
    pub y_t_ob: f64,
    pub y_c_ob: f64,
    pub var_t: f64,
    pub var_c: f64,
    pub pi: f64,
}

impl ObservedStats {
    pub fn new(
        r_squared: f64,
        n_ob: u64,
        y_t_ob: f64,
        y_c_ob: f64,
        var_t: f64,
        var_c: f64,
        pi: f64,
    ) -> Result<Self> {
        let stats = Self {
            r_squared,
            n_ob,
            y_t_ob,
            y_c_ob,
            var_t,
            var_c,
            pi,
        };
        stats.validate()?;
        Ok(stats)
    }

    /// Checks every field invariant. Deserialized values must pass through
    /// this before use.
    pub fn validate(&self) -> Result<()> {
        if !(self.r_squared.is_finite() && (0.0..1.0).contains(&self.r_squared)) {
            return Err(invalid(
                "r_squared",
                format!("must satisfy 0 <= R^2 < 1, got {}", self.r_squared),
            ));
        }
        if self.n_ob < 2 {
            return Err(invalid(
                "n_ob",
                format!("must be at least 2, got {}", self.n_ob),
            ));
        }
        if !self.y_t_ob.is_finite() {
            return Err(invalid("y_t_ob", "must be finite"));
        }
        if !self.y_c_ob.is_finite() {
            return Err(invalid("y_c_ob", "must be finite"));
        }
        if !(self.var_t.is_finite() && self.var_t >= 0.0) {
            return Err(invalid(
                "var_t",
                format!("must be finite and >= 0, got {}", self.var_t),
            ));
        }
        if !(self.var_c.is_finite() && self.var_c >= 0.0) {
            return Err(invalid(
                "var_c",
                format!("must be finite and >= 0, got {}", self.var_c),
            ));
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return Err(invalid(
                "pi",
                format!("must satisfy 0 < pi < 1, got {}", self.pi),
            ));
        }
        Ok(())
    }

    /// Grand mean of the observed outcomes, π·Ȳ_t + (1 − π)·Ȳ_c.
    pub fn grand_mean(&self) -> f64 {
        self.pi * self.y_t_ob + (1.0 - self.pi) * self.y_c_ob
    }

    /// Same statistics with every outcome mean negated.
    pub fn mirrored(&self) -> Self {
        Self {
            y_t_ob: -self.y_t_ob,
            y_c_ob: -self.y_c_ob,
            ..*self
        }
    }
}

/// A point belief about the two mean counterfactual outcomes.
///
/// `y_t_un` is the mean outcome the control subjects would have had under
/// treatment; `y_c_un` the mean the treated subjects would have had under
/// control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterfactualBelief {
    pub y_t_un: f64,
    pub y_c_un: f64,
}

impl CounterfactualBelief {
    pub fn new(y_t_un: f64, y_c_un: f64) -> Result<Self> {
        let belief = Self { y_t_un, y_c_un };
        belief.validate()?;
        Ok(belief)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.y_t_un.is_finite() {
            return Err(invalid("y_t_un", "must be finite"));
        }
        if !self.y_c_un.is_finite() {
            return Err(invalid("y_c_un", "must be finite"));
        }
        Ok(())
    }

    /// The belief that counterfactual means equal the observed means.
    pub fn at_observed(stats: &ObservedStats) -> Self {
        Self {
            y_t_un: stats.y_t_ob,
            y_c_un: stats.y_c_ob,
        }
    }

    pub fn mirrored(&self) -> Self {
        Self {
            y_t_un: -self.y_t_un,
            y_c_un: -self.y_c_un,
        }
    }
}

/// Sign of the significant estimate found in the observed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateSign {
    Positive,
    Negative,
}

impl EstimateSign {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateSign::Positive => "positive",
            EstimateSign::Negative => "negative",
        }
    }

    /// +1 or −1.
    pub fn unit(self) -> f64 {
        match self {
            EstimateSign::Positive => 1.0,
            EstimateSign::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            EstimateSign::Positive => EstimateSign::Negative,
            EstimateSign::Negative => EstimateSign::Positive,
        }
    }
}

/// Decision threshold the ideal-sample effect has to clear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Threshold {
    /// `critical · se`, with the critical value signed to match the estimate.
    Statistical {
        #[serde(rename = "critical")]
        critical_magnitude: f64,
    },
    /// A pragmatic threshold on the standardized coefficient.
    Fixed { beta_sharp: f64 },
}

impl Threshold {
    pub fn statistical(critical_magnitude: f64) -> Result<Self> {
        let t = Threshold::Statistical { critical_magnitude };
        t.validate()?;
        Ok(t)
    }

    pub fn fixed(beta_sharp: f64) -> Result<Self> {
        let t = Threshold::Fixed { beta_sharp };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Threshold::Statistical { critical_magnitude } => {
                if !(critical_magnitude.is_finite() && critical_magnitude > 0.0) {
                    return Err(invalid(
                        "critical",
                        format!(
                            "critical magnitude must be finite and > 0, got {critical_magnitude}"
                        ),
                    ));
                }
            }
            Threshold::Fixed { beta_sharp } => {
                if !beta_sharp.is_finite() {
                    return Err(invalid("beta_sharp", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Signed critical value C for a statistical threshold, `None` for a fixed one.
    pub fn signed_critical(&self, sign: EstimateSign) -> Option<f64> {
        match *self {
            Threshold::Statistical { critical_magnitude } => Some(sign.unit() * critical_magnitude),
            Threshold::Fixed { .. } => None,
        }
    }

    pub(crate) fn check_sign(&self, sign: EstimateSign) -> Result<()> {
        if let Threshold::Fixed { beta_sharp } = *self {
            if beta_sharp * sign.unit() < 0.0 {
                return Err(PivError::SignMismatch {
                    beta_sharp,
                    sign: sign.as_str(),
                });
            }
        }
        Ok(())
    }

    pub fn mirrored(&self) -> Self {
        match *self {
            Threshold::Fixed { beta_sharp } => Threshold::Fixed {
                beta_sharp: -beta_sharp,
            },
            statistical => statistical,
        }
    }
}

/// Means, spread and treatment-outcome correlation of the ideal sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealStats {
    pub y_t_id: f64,
    pub y_c_id: f64,
    pub sigma_y_id: f64,
    pub r_wy_id: f64,
}

/// Distribution of the standardized treatment coefficient given the ideal sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorNormal {
    pub mean: f64,
    pub variance: f64,
}

impl PosteriorNormal {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// PIV at a single belief point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivResult {
    pub piv: f64,
    pub probit_piv: f64,
    /// Resolved threshold on the standardized coefficient.
    pub threshold_value: f64,
    /// Ideal-sample T-ratio, r_wy / se.
    pub t_ratio: f64,
}
