//! Partial-correlation conditional-independence test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::samples::{LaggedData, Node};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::num::Scalar;
use crate::stats::t_two_sided;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiTestResult {
    /// Partial correlation in [−1, 1].
    pub statistic: f64,
    pub p_value: f64,
    pub conditioning_set: Vec<Node>,
    pub sample_size: usize,
    pub dof: usize,
}

/// Tests `x ⊥ y | Z` by correlating the residuals of `x` and `y` regressed
/// on `[1, Z]`. The p-value uses `t = r·sqrt(dof / (1 − r²))` with
/// `dof = n − |Z| − 2`, two-sided.
pub fn parcorr_test<T: Scalar>(x: &[T], y: &[T], z: &DMatrix<T>) -> Result<CiTestResult> {
    parcorr_weighted(
        &DVector::from_column_slice(x),
        &DVector::from_column_slice(y),
        z,
        None,
    )
}

pub(crate) fn parcorr_weighted<T: Scalar>(
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DMatrix<T>,
    sqrt_w: Option<&DVector<T>>,
) -> Result<CiTestResult> {
    let n = x.len();
    let m = z.ncols();
    if y.len() != n || (m > 0 && z.nrows() != n) {
        return Err(Error::InvalidParameter("CI test inputs differ in length".into()));
    }
    if n <= m + 3 {
        return Err(Error::InsufficientData(format!(
            "{n} samples for a conditioning set of size {m}"
        )));
    }
    let w = |r: usize| sqrt_w.map(|w| w[r]).unwrap_or_else(T::one);
    let design = DMatrix::from_fn(n, m + 1, |r, c| if c == 0 { w(r) } else { z[(r, c - 1)] * w(r) });
    let resp = DMatrix::from_fn(n, 2, |r, c| if c == 0 { x[r] * w(r) } else { y[r] * w(r) });
    let fit = least_squares(&design, &resp, None).map_err(|e| match e {
        Error::RankDeficient(_) => Error::DegenerateAfterConditioning,
        other => other,
    })?;
    let rx = fit.residuals.column(0);
    let ry = fit.residuals.column(1);
    let sxx = rx.dot(&rx).as_f64();
    let syy = ry.dot(&ry).as_f64();
    let sxy = rx.dot(&ry).as_f64();
    let scale = |v: &DVector<T>| {
        let mean = v.mean();
        v.iter().map(|e| (*e - mean).as_f64().powi(2)).sum::<f64>().max(f64::MIN_POSITIVE)
    };
    let tol = T::rank_tolerance().as_f64().powi(2);
    if sxx <= tol * scale(x) || syy <= tol * scale(y) {
        return Err(Error::DegenerateAfterConditioning);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let dof = n - m - 2;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided(r * (dof as f64 / (1.0 - r * r)).sqrt(), dof as f64)
    };
    Ok(CiTestResult {
        statistic: r,
        p_value,
        conditioning_set: Vec::new(),
        sample_size: n,
        dof,
    })
}

/// CI test between two nodes of `data` given `cond`.
pub fn node_test<T: Scalar>(data: &LaggedData<T>, x: Node, y: Node, cond: &[Node]) -> Result<CiTestResult> {
    let z = data.matrix(cond);
    let mut res = parcorr_weighted(&data.column(x), &data.column(y), &z, data.sqrt_weights())?;
    res.conditioning_set = cond.to_vec();
    Ok(res)
}
