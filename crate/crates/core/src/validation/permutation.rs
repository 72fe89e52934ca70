//! Permutation falsification of the Granger network.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::shuffled;
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::preprocess::within_transform;
use crate::pvar::{estimate_var, granger_all, GrangerResult, VarModel};
use crate::rng::stream_rng;
use crate::stats::{mean, sample_sd};

/// Fits the fixed-effects VAR(p) on a stationary panel and runs every
/// pairwise Granger test.
pub(crate) fn granger_pipeline(
    data: &Panel<f64>,
    p: usize,
    alpha: f64,
    fixed_effects: bool,
) -> Result<(VarModel<f64>, Vec<GrangerResult>)> {
    let data = if fixed_effects { within_transform(data) } else { data.clone() };
    let model = estimate_var(&data, p)?;
    let tests = granger_all(&model, &data, alpha)?;
    Ok((model, tests))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationConfig {
    pub reps: usize,
    pub alpha: f64,
    pub p: usize,
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            reps: 100,
            alpha: 0.05,
            p: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub real_link_count: usize,
    /// One count per permutation, in replicate order.
    pub null_counts: Vec<usize>,
    pub null_mean: f64,
    pub null_sd: f64,
    /// `None` when the null counts have zero spread and differ from the real count.
    pub z_score: Option<f64>,
    pub infinite_separation: bool,
    pub reps: usize,
}

impl PermutationReport {
    /// Signed z-score with zero-spread separation mapped to ±∞.
    pub fn z(&self) -> f64 {
        match self.z_score {
            Some(z) => z,
            None if self.real_link_count as f64 > self.null_mean => f64::INFINITY,
            None => f64::NEG_INFINITY,
        }
    }

    pub fn summary(&self) -> String {
        let z = match self.z_score {
            Some(z) => format!("{z:.2}"),
            None if self.z() > 0.0 => "inf".into(),
            None => "-inf".into(),
        };
        format!(
            "{} real vs {:.1}±{:.1} placebo, Z={z}",
            self.real_link_count, self.null_mean, self.null_sd
        )
    }
}

/// Independently permutes, for each variable, which entity each series is
/// assigned to. Marginals per variable are preserved; cross-variable
/// alignment within an entity is destroyed.
pub fn permute_entities(data: &Panel<f64>, seed: u64, stream: u64) -> Result<Panel<f64>> {
    let mut rng = stream_rng(seed, stream);
    let perms: Vec<Vec<usize>> = (0..data.n_vars()).map(|_| shuffled(data.n_entities(), &mut rng)).collect();
    data.permute_series(&perms)
}

/// Compares the significant Granger link count on `data` (a stationary
/// panel, demeaned internally) against counts on entity-permuted copies.
pub fn permutation_falsification(data: &Panel<f64>, config: &PermutationConfig) -> Result<PermutationReport> {
    if config.reps < 10 {
        return Err(Error::InvalidParameter("permutation test needs at least 10 replications".into()));
    }
    let count = |d: &Panel<f64>| -> Result<usize> {
        let (_, tests) = granger_pipeline(d, config.p, config.alpha, true)?;
        Ok(tests.iter().filter(|t| t.significant).count())
    };
    let real_link_count = count(data)?;
    let null_counts = (0..config.reps)
        .into_par_iter()
        .map(|r| count(&permute_entities(data, config.seed, r as u64 + 1)?))
        .collect::<Result<Vec<usize>>>()?;
    let nulls: Vec<f64> = null_counts.iter().map(|&c| c as f64).collect();
    let null_mean = mean(&nulls);
    let null_sd = sample_sd(&nulls);
    let diff = real_link_count as f64 - null_mean;
    let (z_score, infinite_separation) = if null_sd > 0.0 {
        (Some(diff / null_sd), false)
    } else if diff == 0.0 {
        (Some(0.0), false)
    } else {
        (None, true)
    };
    Ok(PermutationReport {
        real_link_count,
        null_counts,
        null_mean,
        null_sd,
        z_score,
        infinite_separation,
        reps: config.reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::{simulate_var_panel, VarDgp};
    use nalgebra::DMatrix;

    fn planted(seed: u64) -> Panel<f64> {
        let mut phi = DMatrix::from_diagonal_element(5, 5, 0.3);
        for (t, s) in [(1, 0), (2, 1), (3, 2), (4, 3), (0, 4)] {
            phi[(t, s)] = 0.25;
        }
        let dgp = VarDgp::new(vec![phi], DMatrix::identity(5, 5));
        simulate_var_panel(&dgp, 60, 20, seed).unwrap()
    }

    fn sorted_column(p: &Panel<f64>, v: usize) -> Vec<u64> {
        let mut bits: Vec<u64> = (0..p.n_entities())
            .flat_map(|i| p.series(i, v))
            .map(|c| c.map(f64::to_bits).unwrap_or(u64::MAX))
            .collect();
        bits.sort_unstable();
        bits
    }

    #[test]
    fn permutation_preserves_each_column_multiset() {
        let p = planted(1);
        let q = permute_entities(&p, 9, 3).unwrap();
        for v in 0..p.n_vars() {
            assert_eq!(sorted_column(&p, v), sorted_column(&q, v));
        }
        assert_ne!(p.series(0, 0), q.series(0, 0));
    }

    #[test]
    fn planted_links_separate_from_null() {
        let cfg = PermutationConfig { reps: 30, p: 1, seed: 4, ..PermutationConfig::default() };
        let rep = permutation_falsification(&planted(2), &cfg).unwrap();
        assert_eq!(rep.null_counts.len(), 30);
        let max_null = *rep.null_counts.iter().max().unwrap();
        assert!(rep.real_link_count > max_null, "{}", rep.summary());
        assert!(rep.z() > 3.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = PermutationConfig { reps: 10, p: 1, seed: 7, ..PermutationConfig::default() };
        let a = permutation_falsification(&planted(3), &cfg).unwrap();
        let b = permutation_falsification(&planted(3), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_spread_reports_infinite_separation() {
        let rep = PermutationReport {
            real_link_count: 12,
            null_counts: vec![7; 10],
            null_mean: 7.0,
            null_sd: 0.0,
            z_score: None,
            infinite_separation: true,
            reps: 10,
        };
        assert_eq!(rep.z(), f64::INFINITY);
        assert_eq!(rep.summary(), "12 real vs 7.0±0.0 placebo, Z=inf");
        assert!(serde_json::to_string(&rep).unwrap().contains("\"z_score\":null"));
    }

    #[test]
    fn reps_floor() {
        let cfg = PermutationConfig { reps: 5, ..PermutationConfig::default() };
        assert!(permutation_falsification(&planted(1), &cfg).is_err());
    }
}
