//! Analysis configuration: observed statistics, decision rule and named beliefs.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use piv_core::bounds::DEFAULT_PIV_THRESHOLD;
use piv_core::fixtures::{
    null_belief, retention_stats, retention_threshold, RETENTION_GRAND_MEAN,
    RETENTION_MINUS_SEVEN_ANCHOR, RETENTION_SIGN, RETENTION_Y_C_OB, RETENTION_Y_T_OB,
};
use piv_core::{
    resolve_threshold, BeliefRegion, CounterfactualBelief, EstimateSign, Interval, ObservedStats,
    PivError, Resolution, Threshold,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Closed interval bounds; `null` stands for an infinite side.
pub type Span = [Option<f64>; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BeliefSpec {
    Point {
        name: String,
        y_t_un: f64,
        y_c_un: f64,
    },
    Region {
        name: String,
        t: Span,
        c: Span,
    },
}

impl BeliefSpec {
    pub fn name(&self) -> &str {
        match self {
            BeliefSpec::Point { name, .. } | BeliefSpec::Region { name, .. } => name,
        }
    }

    pub fn point(&self) -> Option<CounterfactualBelief> {
        match *self {
            BeliefSpec::Point { y_t_un, y_c_un, .. } => {
                Some(CounterfactualBelief { y_t_un, y_c_un })
            }
            BeliefSpec::Region { .. } => None,
        }
    }

    /// The belief as a rectangle; a point becomes a zero-width region.
    pub fn region(&self) -> Result<BeliefRegion> {
        let region = match *self {
            BeliefSpec::Point { y_t_un, y_c_un, .. } => {
                BeliefRegion::new(Interval::point(y_t_un), Interval::point(y_c_un))
            }
            BeliefSpec::Region { t, c, .. } => BeliefRegion::new(interval(t), interval(c)),
        };
        region.map_err(|e| field_error(&format!("beliefs.{}", self.name()), e))
    }
}

fn interval([lo, hi]: Span) -> Interval {
    Interval::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))
}

fn default_piv_threshold() -> f64 {
    DEFAULT_PIV_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub observed: ObservedStats,
    pub sign: EstimateSign,
    pub threshold: Threshold,
    pub beliefs: Vec<BeliefSpec>,
    #[serde(default = "default_piv_threshold")]
    pub piv_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Resolution>,
}

fn field_error(prefix: &str, e: PivError) -> CliError {
    match e {
        PivError::InvalidInput { field, reason } => {
            CliError::Config(format!("{prefix}.{field}: {reason}"))
        }
        other => CliError::Config(format!("{prefix}: {other}")),
    }
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks every field and reports the first failure with its path.
    pub fn validate(&self) -> Result<()> {
        self.observed
            .validate()
            .map_err(|e| field_error("observed", e))?;
        resolve_threshold(&self.threshold, self.sign, &self.observed)
            .map_err(|e| field_error("threshold", e))?;
        if !(self.piv_threshold > 0.0 && self.piv_threshold < 1.0) {
            return Err(CliError::Config(format!(
                "piv_threshold: must lie strictly between 0 and 1, got {}",
                self.piv_threshold
            )));
        }
        if let Some(g) = self.grid {
            if g.nt < 2 || g.nc < 2 {
                return Err(CliError::Config(format!(
                    "grid: resolution must be at least 2x2, got {}x{}",
                    g.nt, g.nc
                )));
            }
        }
        let mut seen = HashSet::new();
        for belief in &self.beliefs {
            let name = belief.name();
            if name.is_empty() {
                return Err(CliError::Config(
                    "beliefs: every belief needs a non-empty name".into(),
                ));
            }
            if !seen.insert(name) {
                return Err(CliError::Config(format!(
                    "beliefs: duplicate name `{name}`"
                )));
            }
            if let Some(p) = belief.point() {
                p.validate()
                    .map_err(|e| field_error(&format!("beliefs.{name}"), e))?;
            }
            belief.region()?;
        }
        Ok(())
    }

    pub fn belief(&self, name: &str) -> Result<&BeliefSpec> {
        self.beliefs
            .iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| {
                let known: Vec<&str> = self.beliefs.iter().map(BeliefSpec::name).collect();
                CliError::Config(format!(
                    "no belief named `{name}` (known: {})",
                    known.join(", ")
                ))
            })
    }

    pub fn point_belief(&self, name: &str) -> Result<CounterfactualBelief> {
        self.belief(name)?.point().ok_or_else(|| {
            CliError::Config(format!("belief `{name}` is a region; a point is required"))
        })
    }
}

pub const BELIEF_1: &str = "belief-1";
pub const BELIEF_1_VARIANT: &str = "belief-1-variant";
pub const BELIEF_2: &str = "belief-2";
pub const MINUS_SEVEN: &str = "minus-seven";
pub const PLAUSIBLE: &str = "plausible";
pub const BELIEF_1_CORNER: &str = "belief-1-corner";
pub const NULL_POINT: &str = "null";

/// The kindergarten-retention analysis with the beliefs discussed for it.
pub fn builtin_config() -> AnalysisConfig {
    let stats = retention_stats();
    let null = null_belief(&stats);
    let region = |name: &str, t: Span, c: Span| BeliefSpec::Region {
        name: name.into(),
        t,
        c,
    };
    let point = |name: &str, b: CounterfactualBelief| BeliefSpec::Point {
        name: name.into(),
        y_t_un: b.y_t_un,
        y_c_un: b.y_c_un,
    };
    AnalysisConfig {
        observed: stats,
        sign: RETENTION_SIGN,
        threshold: retention_threshold(),
        beliefs: vec![
            // promoted children, had they been retained, score no higher than they did;
            // retained children, had they been promoted, reach the grand mean
            region(
                BELIEF_1,
                [None, Some(RETENTION_Y_C_OB)],
                [Some(RETENTION_GRAND_MEAN); 2],
            ),
            region(
                BELIEF_1_VARIANT,
                [None, Some(RETENTION_Y_C_OB)],
                [Some(44.0), None],
            ),
            region(
                BELIEF_2,
                [None, Some(RETENTION_GRAND_MEAN)],
                [Some(RETENTION_Y_T_OB), Some(RETENTION_Y_C_OB)],
            ),
            region(
                MINUS_SEVEN,
                [Some(RETENTION_GRAND_MEAN), Some(RETENTION_Y_C_OB)],
                [Some(RETENTION_MINUS_SEVEN_ANCHOR), None],
            ),
            region(
                PLAUSIBLE,
                [Some(RETENTION_Y_T_OB), Some(RETENTION_Y_C_OB)],
                [Some(RETENTION_Y_T_OB), Some(RETENTION_Y_C_OB)],
            ),
            point(
                BELIEF_1_CORNER,
                CounterfactualBelief {
                    y_t_un: RETENTION_Y_C_OB,
                    y_c_un: RETENTION_GRAND_MEAN,
                },
            ),
            point(NULL_POINT, null),
        ],
        piv_threshold: DEFAULT_PIV_THRESHOLD,
        grid: Some(Resolution { nt: 200, nc: 200 }),
    }
}
