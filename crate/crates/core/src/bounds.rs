//! Bounding the PIV over rectangular belief regions.
//!
//! The search is deterministic: a coarse uniform grid locates the best and
//! worst cells, then coordinate descent with a golden-section line search
//! per axis refines each extremum. Unbounded sides are clamped at a finite
//! distance from the observed grand mean and the analytic limit of the PIV
//! in that direction is reported next to the clamped result.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PivError, Result};
use crate::ideal::{control_saturation, piv, piv_from_correlation, treated_saturation};
use crate::model::{CounterfactualBelief, EstimateSign, ObservedStats, Threshold};

/// Closed interval with optionally infinite ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn at_most(hi: f64) -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi,
        }
    }

    pub fn at_least(lo: f64) -> Self {
        Self {
            lo,
            hi: f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    fn validate(&self, axis: &'static str) -> Result<()> {
        let empty = PivError::EmptyRegion {
            axis,
            lo: self.lo,
            hi: self.hi,
        };
        if self.lo.is_nan() || self.hi.is_nan() || self.lo > self.hi {
            return Err(empty);
        }
        // [+inf, +inf] and [-inf, -inf] contain no real point
        if self.lo == f64::INFINITY || self.hi == f64::NEG_INFINITY {
            return Err(empty);
        }
        Ok(())
    }
}

/// Rectangle of plausible (Ȳ_t^un, Ȳ_c^un) values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefRegion {
    pub t: Interval,
    pub c: Interval,
}

impl BeliefRegion {
    pub fn new(t: Interval, c: Interval) -> Result<Self> {
        let region = Self { t, c };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<()> {
        self.t.validate("y_t_un")?;
        self.c.validate("y_c_un")
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.c.is_finite()
    }

    pub fn contains(&self, b: &CounterfactualBelief) -> bool {
        self.t.lo <= b.y_t_un
            && b.y_t_un <= self.t.hi
            && self.c.lo <= b.y_c_un
            && b.y_c_un <= self.c.hi
    }
}

/// PIV evaluated on a uniform rectangular grid. `piv[i][j]` belongs to
/// `(t_values[i], c_values[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub t_values: Vec<f64>,
    pub c_values: Vec<f64>,
    pub piv: Vec<Vec<f64>>,
}

impl ContourGrid {
    pub fn dims(&self) -> (usize, usize) {
        (self.t_values.len(), self.c_values.len())
    }

    /// Smallest value with its (t, c) index; ties go to the lexicographically first cell.
    pub fn min(&self) -> (f64, usize, usize) {
        extremum(&self.piv, |a, b| a < b - TIE_EPS)
    }

    pub fn max(&self) -> (f64, usize, usize) {
        extremum(&self.piv, |a, b| a > b + TIE_EPS)
    }

    /// CSV with a header row of `y_c_un` values and the `y_t_un` value
    /// leading each data row. PIV values carry six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.piv.len() * (self.c_values.len() + 1) * 9);
        out.push_str("y_t_un\\y_c_un");
        for c in &self.c_values {
            out.push(',');
            out.push_str(&c.to_string());
        }
        out.push('\n');
        for (t, row) in self.t_values.iter().zip(&self.piv) {
            out.push_str(&t.to_string());
            for v in row {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid values are finite")
    }
}

const TIE_EPS: f64 = 1e-12;

fn extremum(rows: &[Vec<f64>], better: impl Fn(f64, f64) -> bool) -> (f64, usize, usize) {
    let mut best = (f64::NAN, 0, 0);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if best.0.is_nan() || better(v, best.0) {
                best = (v, i, j);
            }
        }
    }
    best
}

/// Grid resolution along the two axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub nt: usize,
    pub nc: usize,
}

pub const DEFAULT_CELL_CAP: usize = 10_000_000;

fn axis_points(iv: Interval, n: usize) -> Vec<f64> {
    if iv.lo == iv.hi || n < 2 {
        return vec![iv.lo];
    }
    let step = (iv.hi - iv.lo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                iv.hi
            } else {
                iv.lo + step * i as f64
            }
        })
        .collect()
}

/// Evaluates the PIV on a uniform grid over a finite region, endpoints
/// included. An axis of zero width contributes a single point.
pub fn evaluate_grid(
    region: &BeliefRegion,
    resolution: Resolution,
    stats: &ObservedStats,
    sign: EstimateSign,
    threshold: &Threshold,
) -> Result<ContourGrid> {
    evaluate_grid_capped(region, resolution, stats, sign, threshold, DEFAULT_CELL_CAP)
}

pub fn evaluate_grid_capped(
    region: &BeliefRegion,
    resolution: Resolution,
    stats: &ObservedStats,
    sign: EstimateSign,
    threshold: &Threshold,
    cap: usize,
) -> Result<ContourGrid> {
    region.validate()?;
    if !region.is_finite() {
        return Err(PivError::UnboundedRegion);
    }
    if resolution.nt < 2 || resolution.nc < 2 {
        return Err(PivError::InvalidInput {
            field: "grid",
            reason: format!(
                "resolution must be at least 2x2, got {}x{}",
                resolution.nt, resolution.nc
            ),
        });
    }
    let t_values = axis_points(region.t, resolution.nt);
    let c_values = axis_points(region.c, resolution.nc);
    let cells = t_values.len().saturating_mul(c_values.len());
    if cells > cap {
        return Err(PivError::GridTooLarge { cells, cap });
    }
    threshold.validate()?;
    let piv = t_values
        .par_iter()
        .map(|&t| {
            c_values
                .iter()
                .map(|&c| {
                    let b = CounterfactualBelief {
                        y_t_un: t,
                        y_c_un: c,
                    };
                    piv(&b, stats, sign, threshold).map(|r| r.piv)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContourGrid {
        t_values,
        c_values,
        piv,
    })
}

/// Search settings for [`bound_piv`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub coarse: Resolution,
    /// Golden-section iterations per line search.
    pub refine_iters: usize,
    /// Distance beyond the grand mean at which an unbounded side is cut;
    /// `None` means ten times the larger within-group standard deviation.
    pub clamp_width: Option<f64>,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            coarse: Resolution { nt: 101, nc: 101 },
            refine_iters: 60,
            clamp_width: None,
        }
    }
}

/// Which sides of the region were infinite and had to be cut.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClampFlags {
    pub t_lo: bool,
    pub t_hi: bool,
    pub c_lo: bool,
    pub c_hi: bool,
}

impl ClampFlags {
    pub fn any(&self) -> bool {
        self.t_lo || self.t_hi || self.c_lo || self.c_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TreatedToNegInfinity,
    TreatedToPosInfinity,
    ControlToNegInfinity,
    ControlToPosInfinity,
}

/// PIV in the limit along an unbounded direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPiv {
    pub direction: Direction,
    pub correlation: f64,
    pub piv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub piv_min: f64,
    pub argmin: CounterfactualBelief,
    pub piv_max: f64,
    pub argmax: CounterfactualBelief,
    pub clamped: ClampFlags,
    /// Region actually searched after clamping.
    pub searched: BeliefRegion,
    pub asymptotic: Vec<AsymptoticPiv>,
    /// Extremes of the coarse grid before refinement.
    pub coarse_min: f64,
    pub coarse_max: f64,
}

fn clamp_region(
    region: &BeliefRegion,
    stats: &ObservedStats,
    width: f64,
) -> (BeliefRegion, ClampFlags) {
    let anchor = stats.grand_mean();
    let mut flags = ClampFlags::default();
    let cut = |iv: Interval, lo_flag: &mut bool, hi_flag: &mut bool| {
        let mut out = iv;
        if iv.lo == f64::NEG_INFINITY {
            *lo_flag = true;
            out.lo = anchor.min(iv.hi) - width;
        }
        if iv.hi == f64::INFINITY {
            *hi_flag = true;
            out.hi = anchor.max(out.lo) + width;
        }
        out
    };
    let t = cut(region.t, &mut flags.t_lo, &mut flags.t_hi);
    let c = cut(region.c, &mut flags.c_lo, &mut flags.c_hi);
    (BeliefRegion { t, c }, flags)
}

fn asymptotics(
    flags: &ClampFlags,
    stats: &ObservedStats,
    sign: EstimateSign,
    threshold: &Threshold,
) -> Result<Vec<AsymptoticPiv>> {
    let rt = treated_saturation(stats);
    let rc = control_saturation(stats);
    let mut out = Vec::new();
    let dirs = [
        (flags.t_lo, Direction::TreatedToNegInfinity, -rt),
        (flags.t_hi, Direction::TreatedToPosInfinity, rt),
        (flags.c_lo, Direction::ControlToNegInfinity, rc),
        (flags.c_hi, Direction::ControlToPosInfinity, -rc),
    ];
    for (on, direction, correlation) in dirs {
        if on {
            let r = piv_from_correlation(correlation, stats, sign, threshold)?;
            out.push(AsymptoticPiv {
                direction,
                correlation,
                piv: r.piv,
            });
        }
    }
    Ok(out)
}

/// Golden-section minimization of `f` on `[a, b]`. The endpoints are
/// compared against the interior optimum so boundary minima are found.
fn golden_section(f: &impl Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    if a == b {
        return (a, f(a));
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

const MAX_SWEEPS: usize = 50;

/// Coordinate descent on `objective` starting from grid cell (i, j).
fn refine(
    objective: &impl Fn(f64, f64) -> f64,
    t_axis: &[f64],
    c_axis: &[f64],
    start: (usize, usize),
    iters: usize,
) -> (f64, f64, f64) {
    let (mut t, mut c) = (t_axis[start.0], c_axis[start.1]);
    let mut value = objective(t, c);
    let t_step = if t_axis.len() > 1 {
        t_axis[1] - t_axis[0]
    } else {
        0.0
    };
    let c_step = if c_axis.len() > 1 {
        c_axis[1] - c_axis[0]
    } else {
        0.0
    };
    let (t_lo, t_hi) = (t_axis[0], *t_axis.last().unwrap());
    let (c_lo, c_hi) = (c_axis[0], *c_axis.last().unwrap());

    for _ in 0..MAX_SWEEPS {
        let before = value;
        let ft = |x: f64| objective(x, c);
        let (nt, vt) = golden_section(&ft, (t - t_step).max(t_lo), (t + t_step).min(t_hi), iters);
        if vt < value {
            t = nt;
            value = vt;
        }
        let fc = |y: f64| objective(t, y);
        let (nc, vc) = golden_section(&fc, (c - c_step).max(c_lo), (c + c_step).min(c_hi), iters);
        if vc < value {
            c = nc;
            value = vc;
        }
        if before - value <= 1e-15 {
            break;
        }
    }
    (t, c, value)
}

/// Smallest and largest PIV over a belief region.
pub fn bound_piv(
    region: &BeliefRegion,
    stats: &ObservedStats,
    sign: EstimateSign,
    threshold: &Threshold,
    opts: &BoundOptions,
) -> Result<BoundResult> {
    region.validate()?;
    threshold.validate()?;
    let width = opts
        .clamp_width
        .unwrap_or_else(|| 10.0 * stats.var_t.max(stats.var_c).sqrt());
    let (searched, clamped) = clamp_region(region, stats, width);

    let grid = evaluate_grid_capped(&searched, opts.coarse, stats, sign, threshold, usize::MAX)?;
    let (coarse_min, imin, jmin) = grid.min();
    let (coarse_max, imax, jmax) = grid.max();

    // Validity was established on the grid; the objective cannot fail for
    // beliefs inside the same region unless the spread is degenerate there.
    let eval = |t: f64, c: f64| {
        let b = CounterfactualBelief {
            y_t_un: t,
            y_c_un: c,
        };
        piv(&b, stats, sign, threshold)
            .map(|r| r.piv)
            .unwrap_or(f64::NAN)
    };

    let (tmin, cmin, vmin) = refine(
        &eval,
        &grid.t_values,
        &grid.c_values,
        (imin, jmin),
        opts.refine_iters,
    );
    let neg = |t: f64, c: f64| -eval(t, c);
    let (tmax, cmax, vmax) = refine(
        &neg,
        &grid.t_values,
        &grid.c_values,
        (imax, jmax),
        opts.refine_iters,
    );

    Ok(BoundResult {
        piv_min: vmin.min(coarse_min),
        argmin: CounterfactualBelief {
            y_t_un: tmin,
            y_c_un: cmin,
        },
        piv_max: (-vmax).max(coarse_max),
        argmax: CounterfactualBelief {
            y_t_un: tmax,
            y_c_un: cmax,
        },
        clamped,
        searched,
        asymptotic: asymptotics(&clamped, stats, sign, threshold)?,
        coarse_min,
        coarse_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Robust,
    NotRobust,
    Indeterminate,
}

pub const DEFAULT_PIV_THRESHOLD: f64 = 0.8;

/// Robust when even the smallest PIV clears the threshold, not robust when
/// even the largest falls short.
pub fn robustness_verdict(bound: &BoundResult, piv_threshold: f64) -> Verdict {
    if bound.piv_min >= piv_threshold {
        Verdict::Robust
    } else if bound.piv_max < piv_threshold {
        Verdict::NotRobust
    } else {
        Verdict::Indeterminate
    }
}
