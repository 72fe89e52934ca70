//! Entity-block bootstrap for impulse-response bands.

use log::debug;
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::{estimate_var, impulse_response, IrfResult};
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::panel::Panel;
use crate::preprocess::within_transform;
use crate::rng::stream_rng;
use crate::stats::percentile_sorted;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub reps: usize,
    pub seed: u64,
    pub lower_percentile: f64,
    pub upper_percentile: f64,
    /// Fraction of failed replicates tolerated before erroring.
    pub max_failure_fraction: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            reps: 200,
            seed: 0,
            lower_percentile: 2.5,
            upper_percentile: 97.5,
            max_failure_fraction: 0.10,
        }
    }
}

/// Point IRF with percentile bands from resampling whole entities.
///
/// `data` is the differenced panel; each replicate re-applies the within
/// transformation before re-estimating.
pub fn bootstrap_irf<T: Scalar>(
    data: &Panel<T>,
    p: usize,
    horizon: usize,
    ordering: &[usize],
    config: &BootstrapConfig,
) -> Result<IrfResult<T>> {
    if config.reps < 2 {
        return Err(Error::InvalidParameter("bootstrap needs at least 2 replicates".into()));
    }
    let demeaned = within_transform(data);
    let model = estimate_var(&demeaned, p)?;
    let mut irf = impulse_response(&model, horizon, ordering, None)?;

    let n = data.n_entities();
    let draws: Vec<Option<Vec<DMatrix<T>>>> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(config.seed, r as u64 + 1);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let sample = within_transform(&data.select_entities(&idx));
            let fitted = estimate_var(&sample, p).and_then(|m| impulse_response(&m, horizon, ordering, None));
            match fitted {
                Ok(res) => Some(res.responses),
                Err(e) => {
                    debug!("bootstrap replicate {r} failed: {e}");
                    None
                }
            }
        })
        .collect();

    let ok: Vec<&Vec<DMatrix<T>>> = draws.iter().flatten().collect();
    let failed = config.reps - ok.len();
    if failed as f64 > config.max_failure_fraction * config.reps as f64 || ok.len() < 2 {
        return Err(Error::TooManyFailures {
            failed,
            total: config.reps,
        });
    }

    let k = model.k;
    let mut lower = Vec::with_capacity(horizon + 1);
    let mut upper = Vec::with_capacity(horizon + 1);
    let mut widened = 0;
    let mut cell = Vec::with_capacity(ok.len());
    for h in 0..=horizon {
        let mut lo = DMatrix::zeros(k, k);
        let mut hi = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                cell.clear();
                cell.extend(ok.iter().map(|d| d[h][(i, j)].as_f64()));
                cell.sort_by(|a, b| a.total_cmp(b));
                let point = irf.responses[h][(i, j)];
                let mut l = T::lit(percentile_sorted(&cell, config.lower_percentile));
                let mut u = T::lit(percentile_sorted(&cell, config.upper_percentile));
                if point < l {
                    l = point;
                    widened += 1;
                }
                if point > u {
                    u = point;
                    widened += 1;
                }
                lo[(i, j)] = l;
                hi[(i, j)] = u;
            }
        }
        lower.push(lo);
        upper.push(hi);
    }
    irf.ci_lower = Some(lower);
    irf.ci_upper = Some(upper);
    irf.bootstrap_reps = config.reps;
    irf.bootstrap_failures = failed;
    irf.widened_cells = widened;
    Ok(irf)
}
