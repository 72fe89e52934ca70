//! Stationarity pipeline: first differences, ADF checks and the within
//! (entity-demeaning) transformation.

mod adf;

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::panel::Panel;

pub use adf::{adf_by_variable, adf_test, schwert_max_lag, AdfResult, AdfSummary};

/// One transformation applied to a panel, with row accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformStep {
    pub operation: String,
    pub parameters: BTreeMap<String, String>,
    pub entities_in: usize,
    pub entities_out: usize,
    /// Entity-year rows (N × T) before the step.
    pub rows_in: usize,
    pub rows_out: usize,
    pub rows_lost: usize,
}

/// Audit trail of the preprocessing pipeline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformLog {
    pub steps: Vec<TransformStep>,
    pub adf_results: Vec<AdfSummary>,
    pub notes: Vec<String>,
}

impl TransformLog {
    pub fn record<T: Scalar>(
        &mut self,
        operation: &str,
        parameters: &[(&str, String)],
        before: &Panel<T>,
        after: &Panel<T>,
    ) {
        let (rows_in, rows_out) = (before.grid_rows(), after.grid_rows());
        self.steps.push(TransformStep {
            operation: operation.to_string(),
            parameters: parameters
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            entities_in: before.n_entities(),
            entities_out: after.n_entities(),
            rows_in,
            rows_out,
            rows_lost: rows_in.saturating_sub(rows_out),
        });
    }

    /// Every step's accounting satisfies `rows_in − rows_lost = rows_out`
    /// and consecutive steps chain.
    pub fn reconciles(&self) -> bool {
        self.steps.iter().all(|s| s.rows_in == s.rows_out + s.rows_lost)
            && self.steps.windows(2).all(|w| w[0].rows_out == w[1].rows_in)
    }
}

fn has_consecutive_pair<T: Scalar>(s: &[Option<T>]) -> bool {
    s.windows(2).any(|w| w[0].is_some() && w[1].is_some())
}

/// First differences along the year axis.
///
/// The first year is dropped; a difference touching a missing cell is
/// missing. Entities lacking two consecutive observations for some
/// variable are dropped with a warning.
pub fn first_difference<T: Scalar>(data: &Panel<T>) -> Result<Panel<T>> {
    if data.n_years() < 2 {
        return Err(Error::InsufficientData("differencing needs at least two years".into()));
    }
    let keep: Vec<usize> = (0..data.n_entities())
        .filter(|&i| {
            let ok = (0..data.n_vars()).all(|v| has_consecutive_pair(&data.series(i, v)));
            if !ok {
                warn!("entity `{}` dropped: fewer than two consecutive observations", data.entities()[i]);
            }
            ok
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::InsufficientData("no entity can be differenced".into()));
    }
    let years = data.years()[1..].to_vec();
    let entities = keep.iter().map(|&i| data.entities()[i].clone()).collect();
    let out = Panel::from_fn(entities, years, data.variables().to_vec(), |e, y, v| {
        let i = keep[e];
        match (data.get(i, y + 1, v), data.get(i, y, v)) {
            (Some(now), Some(prev)) => Some(now - prev),
            _ => None,
        }
    })?;
    Ok(out.with_groups(data.groups().clone()))
}

/// Subtracts each entity's time mean from every variable.
pub fn within_transform<T: Scalar>(data: &Panel<T>) -> Panel<T> {
    data.map_series(|_, _, s| {
        let (sum, n) = s
            .iter()
            .flatten()
            .fold((T::zero(), 0usize), |(acc, n), &x| (acc + x, n + 1));
        if n == 0 {
            return s.to_vec();
        }
        let mean = sum / T::count(n);
        s.iter().map(|c| c.map(|x| x - mean)).collect()
    })
}

/// Differencing, per-variable ADF screening and demeaning in one pass.
///
/// Returns the demeaned panel, the differenced (pre-demeaning) panel and
/// the log.
pub fn stationarize<T: Scalar>(
    data: &Panel<T>,
    adf_alpha: f64,
    log: &mut TransformLog,
) -> Result<(Panel<T>, Panel<T>)> {
    let diffed = first_difference(data)?;
    log.record("first_difference", &[("lag", "1".into())], data, &diffed);
    log.adf_results = adf_by_variable(&diffed, adf_alpha);
    log.notes.push(
        "ADF: constant, no trend; Schwert maximum lag with AIC selection; MacKinnon approximate p-values"
            .into(),
    );
    let demeaned = within_transform(&diffed);
    log.record("within_transform", &[("demean", "entity".into())], &diffed, &demeaned);
    Ok((demeaned, diffed))
}
