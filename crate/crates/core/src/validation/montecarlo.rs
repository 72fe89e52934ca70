//! Monte Carlo check of the pooled fixed-effects VAR estimator.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{simulate_dgp, DgpSpec};
use crate::error::{Error, Result};
use crate::preprocess::within_transform;
use crate::pvar::estimate_var;
use crate::rng::child_seed;

/// Targets quoted alongside the results; they are not pass/fail gates.
pub const BIAS_TARGET: f64 = 0.15;
pub const COVERAGE_TARGET: (f64, f64) = (0.93, 0.96);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub mean_abs_bias: f64,
    pub ci_coverage: f64,
    pub replications: usize,
    pub requested: usize,
    pub failures: usize,
    pub bias_target: f64,
    pub coverage_target: (f64, f64),
    pub dgp: DgpSpec,
    pub demeaned: bool,
}

#[derive(Debug, Clone, Copy)]
struct RepOutcome {
    abs_error_sum: f64,
    covered: usize,
    count: usize,
}

/// Simulates `reps` panels (a fresh coefficient draw per replicate),
/// demeans, fits VAR(1) and scores every autoregressive coefficient:
/// absolute error and whether `estimate ± 1.96·SE` covers the truth.
pub fn monte_carlo_validate(spec: &DgpSpec, reps: usize, demean: bool) -> Result<McReport> {
    if reps < 10 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 10 replications".into()));
    }
    let outcomes: Vec<Option<RepOutcome>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let rep_spec = DgpSpec {
                seed: child_seed(spec.seed, r as u64),
                ..spec.clone()
            };
            let run = || -> Result<RepOutcome> {
                let sim = simulate_dgp(&rep_spec)?;
                let data = if demean { within_transform(&sim.panel) } else { sim.panel };
                let m = estimate_var(&data, 1)?;
                let (mut abs_error_sum, mut covered) = (0.0, 0);
                for j in 0..spec.k {
                    for v in 0..spec.k {
                        let err = m.coeffs[0][(j, v)] - sim.truth.phi[(j, v)];
                        abs_error_sum += err.abs();
                        if err.abs() <= 1.96 * m.std_errors[0][(j, v)] {
                            covered += 1;
                        }
                    }
                }
                Ok(RepOutcome {
                    abs_error_sum,
                    covered,
                    count: spec.k * spec.k,
                })
            };
            run().map_err(|e| debug!("Monte Carlo replicate {r} failed: {e}")).ok()
        })
        .collect();
    let ok: Vec<RepOutcome> = outcomes.iter().flatten().copied().collect();
    let failures = reps - ok.len();
    if failures as f64 > 0.10 * reps as f64 || ok.is_empty() {
        return Err(Error::TooManyFailures { failed: failures, total: reps });
    }
    let coefs: usize = ok.iter().map(|o| o.count).sum();
    Ok(McReport {
        mean_abs_bias: ok.iter().map(|o| o.abs_error_sum).sum::<f64>() / coefs as f64,
        ci_coverage: ok.iter().map(|o| o.covered).sum::<usize>() as f64 / coefs as f64,
        replications: ok.len(),
        requested: reps,
        failures,
        bias_target: BIAS_TARGET,
        coverage_target: COVERAGE_TARGET,
        dgp: spec.clone(),
        demeaned: demean,
    })
}
