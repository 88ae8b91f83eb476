//! Least-squares fits on explicit ideal samples and the block-matrix
//! identities behind the closed-form treatment coefficient.
//!
//! Columns are ordered intercept, covariates, treatment. Sample moments
//! use the 1/n convention throughout.

use crate::error::Result;
use crate::oracle::dataset::{mean_var, IdealDataset, Provenance};
use crate::oracle::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Intercept, covariates, treatment.
    pub coefficients: Vec<f64>,
    pub xtx_inverse: Matrix,
    /// Residual variance RSS / (N − p − 2).
    pub residual_variance: f64,
    /// Residual variance times the treatment entry of (XᵀX)⁻¹.
    pub coefficient_variance_w: f64,
    /// ‖XᵀX b − Xᵀy‖∞ relative to ‖Xᵀy‖∞.
    pub normal_equation_residual: f64,
}

impl OlsFit {
    pub fn w_coefficient(&self) -> f64 {
        *self.coefficients.last().expect("treatment column present")
    }
}

fn design_rows<'a>(rows: impl Iterator<Item = &'a super::dataset::Row>) -> (Matrix, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in rows {
        let mut x = Vec::with_capacity(r.covariates.len() + 2);
        x.push(1.0);
        x.extend_from_slice(&r.covariates);
        x.push(f64::from(u8::from(r.treated)));
        xs.push(x);
        ys.push(r.outcome);
    }
    (Matrix::from_rows(&xs), ys)
}

/// Design matrix and outcome vector for the whole ideal sample.
pub fn design(dataset: &IdealDataset) -> (Matrix, Vec<f64>) {
    design_rows(dataset.rows.iter())
}

fn fit_normal_equations(x: &Matrix, y: &[f64]) -> Result<OlsFit> {
    let xtx = x.gram();
    let xty = x.t_matvec(y);
    let coefficients = xtx.solve(&xty)?;
    let xtx_inverse = xtx.inverse()?;

    let lhs = xtx.matvec(&coefficients);
    let scale = xty
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let normal_equation_residual = lhs
        .iter()
        .zip(&xty)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        / scale;

    let fitted = x.matvec(&coefficients);
    let rss: f64 = fitted.iter().zip(y).map(|(f, y)| (y - f) * (y - f)).sum();
    let dof = (x.rows() as f64 - x.cols() as f64).max(1.0);
    let residual_variance = rss / dof;
    let k = x.cols() - 1;
    Ok(OlsFit {
        coefficient_variance_w: residual_variance * xtx_inverse[(k, k)],
        coefficients,
        xtx_inverse,
        residual_variance,
        normal_equation_residual,
    })
}

/// Ordinary least squares through the normal equations.
pub fn ols_fit(dataset: &IdealDataset) -> Result<OlsFit> {
    let (x, y) = design(dataset);
    fit_normal_equations(&x, &y)
}

/// Sample moments of the ideal sample arranged as in the block derivation.
struct Moments {
    n: f64,
    z_bar: Vec<f64>,
    w_bar: f64,
    s_zz: Matrix,
    s_zw: Vec<f64>,
    s_zy: Vec<f64>,
    s_ww: f64,
    s_wy: f64,
}

fn cov(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / n
}

fn moments(dataset: &IdealDataset) -> Moments {
    let p = dataset.covariate_count();
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|k| dataset.rows.iter().map(|r| r.covariates[k]).collect())
        .collect();
    let w: Vec<f64> = dataset
        .rows
        .iter()
        .map(|r| f64::from(u8::from(r.treated)))
        .collect();
    let y: Vec<f64> = dataset.rows.iter().map(|r| r.outcome).collect();
    let n = y.len() as f64;

    let mut s_zz = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            s_zz[(i, j)] = cov(&cols[i], &cols[j]);
        }
    }
    Moments {
        n,
        z_bar: cols.iter().map(|c| c.iter().sum::<f64>() / n).collect(),
        w_bar: w.iter().sum::<f64>() / n,
        s_zw: cols.iter().map(|c| cov(c, &w)).collect(),
        s_zy: cols.iter().map(|c| cov(c, &y)).collect(),
        s_ww: cov(&w, &w),
        s_wy: cov(&w, &y),
        s_zz,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// S_ZZ⁻¹ and the Schur complement σ_WW − S_WZ S_ZZ⁻¹ S_ZW.
fn schur(m: &Moments) -> Result<(Matrix, f64)> {
    let p = m.z_bar.len();
    if p == 0 {
        return Ok((Matrix::zeros(0, 0), m.s_ww));
    }
    let zz_inv = m.s_zz.inverse()?;
    let s = m.s_ww - dot(&m.s_zw, &zz_inv.matvec(&m.s_zw));
    Ok((zz_inv, s))
}

/// Treatment coefficient from sample covariances:
/// (σ_WY − S_WZ S_ZZ⁻¹ S_ZY) / (σ_WW − S_WZ S_ZZ⁻¹ S_ZW).
pub fn covariance_form_coefficient(dataset: &IdealDataset) -> Result<f64> {
    let m = moments(dataset);
    let (zz_inv, s) = schur(&m)?;
    let num = if m.z_bar.is_empty() {
        m.s_wy
    } else {
        m.s_wy - dot(&m.s_zw, &zz_inv.matvec(&m.s_zy))
    };
    Ok(num / s)
}

/// Standardized treatment coefficient: the OLS coefficient scaled by sd(W)/sd(Y).
pub fn standardized_w_coefficient(dataset: &IdealDataset) -> Result<f64> {
    let fit = ols_fit(dataset)?;
    let (_, var_w) = dataset.treatment_moments();
    let ys: Vec<f64> = dataset.rows.iter().map(|r| r.outcome).collect();
    let (_, var_y) = mean_var(&ys);
    Ok(fit.w_coefficient() * (var_w / var_y).sqrt())
}

/// (S_VV)⁻¹ assembled blockwise from S_ZZ⁻¹ and the Schur complement.
fn block_s_vv_inverse(m: &Moments, zz_inv: &Matrix, s: f64) -> Matrix {
    let p = m.z_bar.len();
    let mut out = Matrix::zeros(p + 1, p + 1);
    // S_ZZ⁻¹ S_ZW
    let u = zz_inv.matvec(&m.s_zw);
    for i in 0..p {
        for j in 0..p {
            out[(i, j)] = zz_inv[(i, j)] + u[i] * u[j] / s;
        }
        out[(i, p)] = -u[i] / s;
        out[(p, i)] = -u[i] / s;
    }
    out[(p, p)] = 1.0 / s;
    out
}

/// Maximum entrywise gap between (XᵀX)⁻¹ assembled from the block
/// formulas and a direct inversion. The treatment row is also rebuilt
/// from its own closed form and included in the comparison.
pub fn block_inverse_check(dataset: &IdealDataset) -> Result<f64> {
    let (x, _) = design(dataset);
    let direct = x.gram().inverse()?;

    let m = moments(dataset);
    let (zz_inv, s) = schur(&m)?;
    let s_vv_inv = block_s_vv_inverse(&m, &zz_inv, s);
    let p = m.z_bar.len();
    let n = m.n;

    let mut v_bar = m.z_bar.clone();
    v_bar.push(m.w_bar);
    let sv = s_vv_inv.matvec(&v_bar);

    let mut block = Matrix::zeros(p + 2, p + 2);
    block[(0, 0)] = 1.0 / n + dot(&v_bar, &sv) / n;
    for i in 0..=p {
        block[(0, i + 1)] = -sv[i] / n;
        block[(i + 1, 0)] = -sv[i] / n;
        for j in 0..=p {
            block[(i + 1, j + 1)] = s_vv_inv[(i, j)] / n;
        }
    }
    let mut err = block.max_abs_diff(&direct);

    // last row written out directly
    let u = zz_inv.matvec(&m.s_zw);
    let last = p + 1;
    let first = (dot(&u, &m.z_bar) - m.w_bar) / (s * n);
    err = err.max((first - direct[(last, 0)]).abs());
    for k in 0..p {
        err = err.max((-u[k] / (s * n) - direct[(last, k + 1)]).abs());
    }
    err = err.max((1.0 / (s * n) - direct[(last, last)]).abs());
    Ok(err)
}

/// Relative gap between σ²·[(XᵀX)⁻¹]_ww and σ² / (N · (σ_WW − S_WZ S_ZZ⁻¹ S_ZW)).
pub fn coefficient_variance_check(dataset: &IdealDataset, sigma2: f64) -> Result<f64> {
    let (x, _) = design(dataset);
    let inv = x.gram().inverse()?;
    let last = inv.rows() - 1;
    let m = moments(dataset);
    let (_, s) = schur(&m)?;
    let direct = sigma2 * inv[(last, last)];
    let closed = sigma2 / (m.n * s);
    Ok((direct - closed).abs() / closed.abs())
}

/// Maximum coefficient gap between the posterior mean obtained by combining
/// a prior fitted on the counterfactual half with the observed-half
/// likelihood, and OLS on the stacked ideal sample.
pub fn bayes_combination_check(dataset: &IdealDataset) -> Result<f64> {
    let (x_ob, y_ob) = design_rows(
        dataset
            .rows
            .iter()
            .filter(|r| r.provenance == Provenance::Observed),
    );
    let (x_un, y_un) = design_rows(
        dataset
            .rows
            .iter()
            .filter(|r| r.provenance == Provenance::Counterfactual),
    );
    let g_ob = x_ob.gram();
    let g_un = x_un.gram();
    // the prior must be proper and the likelihood identifiable on its own
    g_un.inverse()?;
    g_ob.inverse()?;

    let precision = g_un.add(&g_ob);
    let rhs: Vec<f64> = x_un
        .t_matvec(&y_un)
        .iter()
        .zip(x_ob.t_matvec(&y_ob))
        .map(|(a, b)| a + b)
        .collect();
    let theta = precision.solve(&rhs)?;
    let fit = ols_fit(dataset)?;
    Ok(theta
        .iter()
        .zip(&fit.coefficients)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}
