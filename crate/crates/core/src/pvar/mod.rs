//! Pooled-OLS panel VAR on within-transformed data.

mod bootstrap;
mod granger;
mod irf;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, min_symmetric_eigenvalue, spectral_radius};
use crate::num::Scalar;
use crate::panel::Panel;

pub use bootstrap::{bootstrap_irf, BootstrapConfig};
pub use granger::{granger_all, granger_network, granger_test, GrangerResult};
pub use irf::{
    fevd, impact_matrix, impulse_response, ma_coefficients, resolve_ordering, FevdResult,
    IrfResult,
};

/// Regressors and responses stacked across entities.
///
/// Columns are `const, v1.L1..vk.L1, ..., v1.Lp..vk.Lp`. A row is the
/// response at year index `t ≥ start` together with its `p` lags, all from
/// the same entity and all present.
#[derive(Debug, Clone)]
pub struct StackedDesign<T: Scalar> {
    pub x: DMatrix<T>,
    pub y: DMatrix<T>,
    pub column_names: Vec<String>,
    pub p: usize,
    /// Rows contributed by each entity.
    pub rows_per_entity: Vec<usize>,
}

impl<T: Scalar> StackedDesign<T> {
    pub fn build(data: &Panel<T>, p: usize, start: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidParameter("lag order must be at least 1".into()));
        }
        if start < p {
            return Err(Error::InvalidParameter(format!(
                "sample start {start} precedes lag order {p}"
            )));
        }
        let (n, t_len, k) = data.dims();
        let mut rows: Vec<(usize, usize)> = Vec::new();
        let mut rows_per_entity = vec![0; n];
        for i in 0..n {
            for t in start..t_len {
                let complete = (0..=p).all(|l| (0..k).all(|v| data.is_present(i, t - l, v)));
                if complete {
                    rows.push((i, t));
                    rows_per_entity[i] += 1;
                }
            }
        }
        let ncol = 1 + k * p;
        let x = DMatrix::from_fn(rows.len(), ncol, |r, c| {
            let (i, t) = rows[r];
            if c == 0 {
                T::one()
            } else {
                let lag = (c - 1) / k + 1;
                let v = (c - 1) % k;
                data.get(i, t - lag, v).expect("checked present")
            }
        });
        let y = DMatrix::from_fn(rows.len(), k, |r, v| {
            let (i, t) = rows[r];
            data.get(i, t, v).expect("checked present")
        });
        let mut column_names = vec!["const".to_string()];
        for lag in 1..=p {
            for v in data.variables() {
                column_names.push(format!("{v}.L{lag}"));
            }
        }
        Ok(StackedDesign {
            x,
            y,
            column_names,
            p,
            rows_per_entity,
        })
    }

    pub fn nobs(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.y.ncols()
    }

    /// Column of `driver` at `lag` (1-based).
    pub fn column(&self, driver: usize, lag: usize) -> usize {
        1 + (lag - 1) * self.k() + driver
    }
}

/// Fitted panel VAR(p).
#[derive(Debug, Clone)]
pub struct VarModel<T: Scalar> {
    pub variables: Vec<String>,
    pub k: usize,
    pub p: usize,
    /// First year index used as a response (`p` unless the sample was trimmed).
    pub sample_start: usize,
    pub intercept: DVector<T>,
    /// `coeffs[l − 1][(response, driver)]` is the lag-`l` coefficient.
    pub coeffs: Vec<DMatrix<T>>,
    /// Standard errors laid out like `coeffs`.
    pub std_errors: Vec<DMatrix<T>>,
    pub intercept_se: DVector<T>,
    /// Residual covariance, cross-products over `dof_resid`.
    pub sigma: DMatrix<T>,
    pub ssr: Vec<T>,
    pub nobs: usize,
    pub dof_resid: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub spectral_radius: f64,
}

impl<T: Scalar> VarModel<T> {
    pub fn coefficient(&self, lag: usize, response: usize, driver: usize) -> T {
        self.coeffs[lag - 1][(response, driver)]
    }

    /// `kp × kp` companion matrix.
    pub fn companion(&self) -> DMatrix<T> {
        companion(&self.coeffs)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius < 1.0
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variable `{name}`")))
    }

    /// Builds a model from known parameters (no sample attached).
    pub fn from_parameters(variables: Vec<String>, coeffs: Vec<DMatrix<T>>, sigma: DMatrix<T>) -> Result<Self> {
        let k = variables.len();
        if coeffs.is_empty() || coeffs.iter().any(|c| c.shape() != (k, k)) || sigma.shape() != (k, k) {
            return Err(Error::InvalidParameter("coefficient or covariance shape mismatch".into()));
        }
        let p = coeffs.len();
        let rho = spectral_radius(&companion(&coeffs)).as_f64();
        Ok(VarModel {
            variables,
            k,
            p,
            sample_start: p,
            intercept: DVector::zeros(k),
            std_errors: vec![DMatrix::zeros(k, k); p],
            intercept_se: DVector::zeros(k),
            coeffs,
            sigma,
            ssr: vec![T::zero(); k],
            nobs: 0,
            dof_resid: 0,
            log_likelihood: f64::NAN,
            aic: f64::NAN,
            bic: f64::NAN,
            spectral_radius: rho,
        })
    }
}

pub fn companion<T: Scalar>(coeffs: &[DMatrix<T>]) -> DMatrix<T> {
    let p = coeffs.len();
    let k = coeffs[0].nrows();
    let mut m = DMatrix::zeros(k * p, k * p);
    for (l, c) in coeffs.iter().enumerate() {
        m.view_mut((0, l * k), (k, k)).copy_from(c);
    }
    for i in k..k * p {
        m[(i, i - k)] = T::one();
    }
    m
}

fn fit_design<T: Scalar>(design: &StackedDesign<T>, variables: &[String], start: usize) -> Result<VarModel<T>> {
    let (k, p) = (design.k(), design.p);
    let nobs = design.nobs();
    let ncol = 1 + k * p;
    if nobs <= ncol {
        return Err(Error::InsufficientData(format!(
            "{nobs} stacked observations for {ncol} regressors per equation"
        )));
    }
    let fit = least_squares(&design.x, &design.y, Some(&design.column_names))?;
    let dof = nobs - ncol;
    let resid = &fit.residuals;
    let cross = resid.transpose() * resid;
    let sigma = &cross / T::count(dof);
    let xtx_inv = fit.xtx_inverse();
    let ssr = fit.ssr();

    let intercept = DVector::from_fn(k, |j, _| fit.coef[(0, j)]);
    let intercept_se = DVector::from_fn(k, |j, _| (sigma[(j, j)] * xtx_inv[(0, 0)]).sqrt());
    let coeffs: Vec<DMatrix<T>> = (1..=p)
        .map(|l| DMatrix::from_fn(k, k, |j, v| fit.coef[(design.column(v, l), j)]))
        .collect();
    let std_errors = (1..=p)
        .map(|l| {
            DMatrix::from_fn(k, k, |j, v| {
                let c = design.column(v, l);
                (sigma[(j, j)] * xtx_inv[(c, c)]).sqrt()
            })
        })
        .collect();

    let min_eig = min_symmetric_eigenvalue(&sigma).as_f64();
    if min_eig < -1e-10 {
        return Err(Error::NotPositiveDefinite);
    }

    // Gaussian system likelihood at the ML covariance
    let n = nobs as f64;
    let kf = k as f64;
    let sigma_ml: DMatrix<f64> = DMatrix::from_fn(k, k, |a, b| cross[(a, b)].as_f64() / n);
    let logdet = sigma_ml.determinant().ln();
    let log_likelihood = -0.5 * n * kf * (2.0 * std::f64::consts::PI).ln() - 0.5 * n * logdet - 0.5 * n * kf;
    let params = (k * ncol) as f64;
    let rho = spectral_radius(&companion(&coeffs)).as_f64();
    Ok(VarModel {
        variables: variables.to_vec(),
        k,
        p,
        sample_start: start,
        intercept,
        coeffs,
        std_errors,
        intercept_se,
        sigma,
        ssr,
        nobs,
        dof_resid: dof,
        log_likelihood,
        aic: -2.0 * log_likelihood + 2.0 * params,
        bic: -2.0 * log_likelihood + params * n.ln(),
        spectral_radius: rho,
    })
}

/// Fits a VAR(p) by equation-wise OLS on observations stacked across
/// entities. Lags never cross entity boundaries.
pub fn estimate_var<T: Scalar>(data: &Panel<T>, p: usize) -> Result<VarModel<T>> {
    estimate_var_from(data, p, p)
}

/// As [`estimate_var`], with responses starting at year index `start ≥ p`.
pub fn estimate_var_from<T: Scalar>(data: &Panel<T>, p: usize, start: usize) -> Result<VarModel<T>> {
    let design = StackedDesign::build(data, p, start)?;
    fit_design(&design, data.variables(), start)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCriteria {
    pub p: usize,
    pub aic: f64,
    pub bic: f64,
    pub nobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub table: Vec<LagCriteria>,
    /// AIC minimiser, smallest `p` on ties.
    pub chosen: usize,
    pub chosen_bic: usize,
}

/// Fits `p = 1..=p_max` on the sample trimmed to `p_max` and picks the
/// AIC minimiser.
pub fn select_lag<T: Scalar>(data: &Panel<T>, p_max: usize) -> Result<LagSelection> {
    if p_max < 1 {
        return Err(Error::InvalidParameter("p_max must be at least 1".into()));
    }
    let mut table = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let m = estimate_var_from(data, p, p_max)?;
        table.push(LagCriteria {
            p,
            aic: m.aic,
            bic: m.bic,
            nobs: m.nobs,
        });
    }
    let argmin = |f: fn(&LagCriteria) -> f64| {
        table
            .iter()
            .fold(None::<&LagCriteria>, |best, row| match best {
                Some(b) if f(b) <= f(row) => Some(b),
                _ => Some(row),
            })
            .map(|r| r.p)
            .unwrap_or(1)
    };
    let chosen = argmin(|r| r.aic);
    let chosen_bic = argmin(|r| r.bic);
    Ok(LagSelection {
        table,
        chosen,
        chosen_bic,
    })
}
