//! Explicit ideal samples whose cell moments match a specification exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, PivError, Result};
use crate::model::{CounterfactualBelief, ObservedStats};

/// Group sizes, cell moments and covariate count for a synthetic study.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_ob: usize,
    pub n_treated: usize,
    pub y_t_ob: f64,
    pub y_c_ob: f64,
    pub y_t_un: f64,
    pub y_c_un: f64,
    pub var_t: f64,
    pub var_c: f64,
    pub covariates: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Checks that both groups have a positive even size so that each cell
    /// can be matched with a symmetric two-point placement.
    pub fn validate(&self) -> Result<()> {
        let n_control = self.n_ob.saturating_sub(self.n_treated);
        if self.n_treated == 0 || n_control == 0 {
            return Err(PivError::InfeasibleSpec(format!(
                "both groups must be non-empty (n_ob = {}, n_treated = {})",
                self.n_ob, self.n_treated
            )));
        }
        if !self.n_treated.is_multiple_of(2) || !n_control.is_multiple_of(2) {
            return Err(PivError::InfeasibleSpec(format!(
                "group sizes must be even (treated = {}, control = {n_control})",
                self.n_treated
            )));
        }
        for (name, v) in [
            ("y_t_ob", self.y_t_ob),
            ("y_c_ob", self.y_c_ob),
            ("y_t_un", self.y_t_un),
            ("y_c_un", self.y_c_un),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        for (name, v) in [("var_t", self.var_t), ("var_c", self.var_c)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn n_control(&self) -> usize {
        self.n_ob - self.n_treated
    }

    pub fn pi(&self) -> f64 {
        self.n_treated as f64 / self.n_ob as f64
    }

    pub fn belief(&self) -> CounterfactualBelief {
        CounterfactualBelief {
            y_t_un: self.y_t_un,
            y_c_un: self.y_c_un,
        }
    }

    /// Summary statistics of the observed half, with the supplied R².
    pub fn observed_stats(&self, r_squared: f64) -> Result<ObservedStats> {
        ObservedStats::new(
            r_squared,
            self.n_ob as u64,
            self.y_t_ob,
            self.y_c_ob,
            self.var_t,
            self.var_c,
            self.pi(),
        )
    }

    /// A random feasible spec: p in 0..=6, even n_ob in 8..=512.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let covariates = rng.gen_range(0..=6);
        let n_ob = 2 * rng.gen_range(4..=256);
        let n_treated = 2 * rng.gen_range(1..n_ob / 2);
        let mut mean = || rng.gen_range(-10.0..10.0);
        let (y_t_ob, y_c_ob, y_t_un, y_c_un) = (mean(), mean(), mean(), mean());
        Self {
            n_ob,
            n_treated,
            y_t_ob,
            y_c_ob,
            y_t_un,
            y_c_un,
            var_t: rng.gen_range(0.1..5.0),
            var_c: rng.gen_range(0.1..5.0),
            covariates,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Observed,
    Counterfactual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub outcome: f64,
    pub treated: bool,
    pub covariates: Vec<f64>,
    pub provenance: Provenance,
}

/// Observed rows followed by their counterfactual twins. Subject `i`
/// contributes row `i` and row `n_ob + i`, with opposite treatment and the
/// same covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealDataset {
    pub n_ob: usize,
    pub rows: Vec<Row>,
}

impl IdealDataset {
    pub fn covariate_count(&self) -> usize {
        self.rows.first().map_or(0, |r| r.covariates.len())
    }

    /// Mean and 1/n variance of W over all rows.
    pub fn treatment_moments(&self) -> (f64, f64) {
        let w: Vec<f64> = self
            .rows
            .iter()
            .map(|r| f64::from(u8::from(r.treated)))
            .collect();
        mean_var(&w)
    }

    /// Mean and 1/n variance of the outcomes in one (arm, provenance) cell.
    pub fn cell_moments(&self, treated: bool, provenance: Provenance) -> (f64, f64) {
        let ys: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.treated == treated && r.provenance == provenance)
            .map(|r| r.outcome)
            .collect();
        mean_var(&ys)
    }

    /// Copy with covariate `k` appended again as an extra column.
    pub fn with_duplicated_covariate(&self, k: usize) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            let v = r.covariates[k];
            r.covariates.push(v);
        }
        out
    }
}

pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Builds the ideal sample for `spec`. Every cell puts half its rows at
/// mean + sd and half at mean − sd, so cell means and 1/n variances are
/// exact. Covariates are drawn per subject from the seed and shared by
/// the subject's two rows, which makes cov(W, Z) vanish.
pub fn build_exact_dataset(spec: &SyntheticSpec) -> Result<IdealDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_ob;
    let sd_t = spec.var_t.sqrt();
    let sd_c = spec.var_c.sqrt();

    let subjects: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            // treated subjects sit higher on every covariate, as selection would do
            let shift = if i < spec.n_treated { 0.5 } else { 0.0 };
            (0..spec.covariates)
                .map(|_| shift + rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();

    let spread = |i: usize, sd: f64| if i.is_multiple_of(2) { sd } else { -sd };
    let mut rows = Vec::with_capacity(2 * n);
    for (i, z) in subjects.iter().enumerate() {
        let treated = i < spec.n_treated;
        let outcome = if treated {
            spec.y_t_ob + spread(i, sd_t)
        } else {
            spec.y_c_ob + spread(i, sd_c)
        };
        rows.push(Row {
            outcome,
            treated,
            covariates: z.clone(),
            provenance: Provenance::Observed,
        });
    }
    for (i, z) in subjects.into_iter().enumerate() {
        let was_treated = i < spec.n_treated;
        let outcome = if was_treated {
            spec.y_c_un + spread(i, sd_c)
        } else {
            spec.y_t_un + spread(i, sd_t)
        };
        rows.push(Row {
            outcome,
            treated: !was_treated,
            covariates: z,
            provenance: Provenance::Counterfactual,
        });
    }

    let dataset = IdealDataset { n_ob: n, rows };
    let (w_bar, w_var) = dataset.treatment_moments();
    assert!(
        w_bar == 0.5 && w_var == 0.25,
        "ideal sample must have balanced arms (mean {w_bar}, var {w_var})"
    );
    Ok(dataset)
}
