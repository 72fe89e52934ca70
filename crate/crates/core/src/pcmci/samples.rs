//! Lag-aligned sample matrix stacked across entities.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::panel::Panel;

/// A variable observed at `t − lag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Node {
    pub var: usize,
    pub lag: usize,
}

impl Node {
    pub fn new(var: usize, lag: usize) -> Self {
        Node { var, lag }
    }

    pub fn shifted(self, by: usize) -> Self {
        Node {
            var: self.var,
            lag: self.lag + by,
        }
    }
}

/// Optional per-row weighting of the partial-correlation regressions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Ordinary least squares.
    #[default]
    None,
    /// Rows weighted by the inverse of their entity's mean within-entity variance.
    EntityInverseVariance,
}

/// Every `(variable, lag ≤ max_lag)` column over a common set of rows.
///
/// Rows are `(entity, t)` with `t ≥ max_lag` and all variables present on
/// `t − max_lag ..= t`; windows never straddle two entities.
#[derive(Debug, Clone)]
pub struct LaggedData<T: Scalar> {
    pub variables: Vec<String>,
    pub max_lag: usize,
    cols: DMatrix<T>,
    sqrt_weights: Option<DVector<T>>,
    rows_per_entity: Vec<usize>,
}

impl<T: Scalar> LaggedData<T> {
    pub fn from_panel(data: &Panel<T>, max_lag: usize, weighting: Weighting) -> Result<Self> {
        let (n, t_len, k) = data.dims();
        let mut rows = Vec::new();
        let mut rows_per_entity = vec![0; n];
        for i in 0..n {
            for t in max_lag..t_len {
                if (0..=max_lag).all(|l| (0..k).all(|v| data.is_present(i, t - l, v))) {
                    rows.push((i, t));
                    rows_per_entity[i] += 1;
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::InsufficientData(format!(
                "no complete windows of length {} in the panel",
                max_lag + 1
            )));
        }
        let cols = DMatrix::from_fn(rows.len(), k * (max_lag + 1), |r, c| {
            let (i, t) = rows[r];
            let (lag, v) = (c / k, c % k);
            data.get(i, t - lag, v).expect("checked present")
        });
        let sqrt_weights = match weighting {
            Weighting::None => None,
            Weighting::EntityInverseVariance => {
                let w: Vec<T> = (0..n)
                    .map(|i| {
                        let mut total = T::zero();
                        for v in 0..k {
                            let s: Vec<T> = data.series(i, v).into_iter().flatten().collect();
                            if s.len() > 1 {
                                let m = s.iter().fold(T::zero(), |a, &b| a + b) / T::count(s.len());
                                let var = s.iter().fold(T::zero(), |a, &b| a + (b - m) * (b - m))
                                    / T::count(s.len() - 1);
                                total += var;
                            }
                        }
                        let mean_var = total / T::count(k.max(1));
                        if mean_var > T::zero() {
                            (T::one() / mean_var).sqrt()
                        } else {
                            T::one()
                        }
                    })
                    .collect();
                Some(DVector::from_fn(rows.len(), |r, _| w[rows[r].0]))
            }
        };
        Ok(LaggedData {
            variables: data.variables().to_vec(),
            max_lag,
            cols,
            sqrt_weights,
            rows_per_entity,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.cols.nrows()
    }

    pub fn k(&self) -> usize {
        self.variables.len()
    }

    pub fn rows_per_entity(&self) -> &[usize] {
        &self.rows_per_entity
    }

    pub fn column(&self, node: Node) -> DVector<T> {
        assert!(node.lag <= self.max_lag, "lag {} beyond sample window", node.lag);
        self.cols.column(node.lag * self.k() + node.var).into_owned()
    }

    pub fn matrix(&self, nodes: &[Node]) -> DMatrix<T> {
        let idx: Vec<usize> = nodes.iter().map(|n| n.lag * self.k() + n.var).collect();
        self.cols.select_columns(&idx)
    }

    pub fn sqrt_weights(&self) -> Option<&DVector<T>> {
        self.sqrt_weights.as_ref()
    }
}
