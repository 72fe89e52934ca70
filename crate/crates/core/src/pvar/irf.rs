//! Orthogonalized impulse responses and forecast-error variance decomposition.

use nalgebra::DMatrix;

use super::VarModel;
use crate::error::{Error, Result};
use crate::linalg::lower_cholesky;
use crate::num::Scalar;

/// Response surface `[h][impulse][response]`, one-standard-deviation
/// orthogonalized shocks.
#[derive(Debug, Clone)]
pub struct IrfResult<T: Scalar> {
    pub variables: Vec<String>,
    /// Cholesky ordering used, as variable names.
    pub ordering: Vec<String>,
    /// `responses[h][(impulse, response)]`.
    pub responses: Vec<DMatrix<T>>,
    pub ci_lower: Option<Vec<DMatrix<T>>>,
    pub ci_upper: Option<Vec<DMatrix<T>>>,
    pub bootstrap_reps: usize,
    pub bootstrap_failures: usize,
    /// Band cells widened so that they contain the point estimate.
    pub widened_cells: usize,
}

impl<T: Scalar> IrfResult<T> {
    pub fn horizon(&self) -> usize {
        self.responses.len() - 1
    }

    pub fn response(&self, h: usize, impulse: usize, response: usize) -> T {
        self.responses[h][(impulse, response)]
    }

    pub fn band(&self, h: usize, impulse: usize, response: usize) -> Option<(T, T)> {
        match (&self.ci_lower, &self.ci_upper) {
            (Some(lo), Some(hi)) => Some((lo[h][(impulse, response)], hi[h][(impulse, response)])),
            _ => None,
        }
    }

    /// Long-format rows `(h, impulse, response, point, lo, hi)`.
    pub fn long_rows(&self) -> Vec<(usize, String, String, f64, Option<f64>, Option<f64>)> {
        let k = self.variables.len();
        let mut rows = Vec::with_capacity(self.responses.len() * k * k);
        for h in 0..self.responses.len() {
            for i in 0..k {
                for j in 0..k {
                    let band = self.band(h, i, j);
                    rows.push((
                        h,
                        self.variables[i].clone(),
                        self.variables[j].clone(),
                        self.response(h, i, j).as_f64(),
                        band.map(|b| b.0.as_f64()),
                        band.map(|b| b.1.as_f64()),
                    ));
                }
            }
        }
        rows
    }
}

/// Variable indices in Cholesky order; `None` keeps column order.
pub fn resolve_ordering(variables: &[String], ordering: Option<&[String]>) -> Result<Vec<usize>> {
    let Some(names) = ordering else {
        return Ok((0..variables.len()).collect());
    };
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            variables
                .iter()
                .position(|v| v == n)
                .ok_or_else(|| Error::InvalidParameter(format!("ordering names unknown variable `{n}`")))
        })
        .collect::<Result<_>>()?;
    let mut sorted = idx.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != variables.len() || idx.len() != variables.len() {
        return Err(Error::InvalidParameter("ordering must list every variable exactly once".into()));
    }
    Ok(idx)
}

/// Reduced-form MA coefficients Ψ_0..Ψ_H.
pub fn ma_coefficients<T: Scalar>(model: &VarModel<T>, horizon: usize) -> Vec<DMatrix<T>> {
    let k = model.k;
    let mut psi: Vec<DMatrix<T>> = vec![DMatrix::identity(k, k)];
    for h in 1..=horizon {
        let mut acc = DMatrix::zeros(k, k);
        for l in 1..=h.min(model.p) {
            acc += &model.coeffs[l - 1] * &psi[h - l];
        }
        psi.push(acc);
    }
    psi
}

/// Contemporaneous impact matrix `[response][impulse]` from the Cholesky
/// factor of sigma taken in `ordering`.
pub fn impact_matrix<T: Scalar>(sigma: &DMatrix<T>, ordering: &[usize], ridge: Option<T>) -> Result<DMatrix<T>> {
    let k = sigma.nrows();
    let mut permuted = DMatrix::from_fn(k, k, |a, b| sigma[(ordering[a], ordering[b])]);
    let l = match lower_cholesky(&permuted) {
        Some(l) => l,
        None => match ridge {
            Some(eps) => {
                for d in 0..k {
                    permuted[(d, d)] += eps;
                }
                lower_cholesky(&permuted).ok_or(Error::NotPositiveDefinite)?
            }
            None => return Err(Error::NotPositiveDefinite),
        },
    };
    let mut b = DMatrix::zeros(k, k);
    for a in 0..k {
        for c in 0..k {
            b[(ordering[a], ordering[c])] = l[(a, c)];
        }
    }
    Ok(b)
}

fn orthogonalized<T: Scalar>(model: &VarModel<T>, horizon: usize, ordering: &[usize], ridge: Option<T>) -> Result<Vec<DMatrix<T>>> {
    let b = impact_matrix(&model.sigma, ordering, ridge)?;
    Ok(ma_coefficients(model, horizon).iter().map(|psi| psi * &b).collect())
}

/// Point impulse responses Θ_h = Ψ_h·B for h = 0..=horizon.
pub fn impulse_response<T: Scalar>(
    model: &VarModel<T>,
    horizon: usize,
    ordering: &[usize],
    ridge: Option<T>,
) -> Result<IrfResult<T>> {
    if ordering.len() != model.k {
        return Err(Error::InvalidParameter("ordering length differs from variable count".into()));
    }
    let theta = orthogonalized(model, horizon, ordering, ridge)?;
    Ok(IrfResult {
        variables: model.variables.clone(),
        ordering: ordering.iter().map(|&i| model.variables[i].clone()).collect(),
        responses: theta.iter().map(|m| m.transpose()).collect(),
        ci_lower: None,
        ci_upper: None,
        bootstrap_reps: 0,
        bootstrap_failures: 0,
        widened_cells: 0,
    })
}

/// `shares[h][(variable, shock)]`.
#[derive(Debug, Clone)]
pub struct FevdResult<T: Scalar> {
    pub variables: Vec<String>,
    pub ordering: Vec<String>,
    pub shares: Vec<DMatrix<T>>,
}

impl<T: Scalar> FevdResult<T> {
    pub fn share(&self, h: usize, variable: usize, shock: usize) -> T {
        self.shares[h][(variable, shock)]
    }

    pub fn long_rows(&self) -> Vec<(usize, String, String, f64)> {
        let k = self.variables.len();
        let mut rows = Vec::new();
        for (h, m) in self.shares.iter().enumerate() {
            for j in 0..k {
                for s in 0..k {
                    rows.push((h, self.variables[j].clone(), self.variables[s].clone(), m[(j, s)].as_f64()));
                }
            }
        }
        rows
    }
}

/// Forecast-error variance shares accumulated over horizons 0..=h.
pub fn fevd<T: Scalar>(model: &VarModel<T>, horizon: usize, ordering: &[usize], ridge: Option<T>) -> Result<FevdResult<T>> {
    let theta = orthogonalized(model, horizon, ordering, ridge)?;
    let k = model.k;
    let mut cumulative = DMatrix::<T>::zeros(k, k);
    let mut shares = Vec::with_capacity(horizon + 1);
    for th in &theta {
        cumulative += th.component_mul(th);
        let mut s = cumulative.clone();
        for j in 0..k {
            let total = cumulative.row(j).sum();
            for c in 0..k {
                s[(j, c)] = if total > T::zero() { cumulative[(j, c)] / total } else { T::zero() };
            }
        }
        shares.push(s);
    }
    Ok(FevdResult {
        variables: model.variables.clone(),
        ordering: ordering.iter().map(|&i| model.variables[i].clone()).collect(),
        shares,
    })
}
