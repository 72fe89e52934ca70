//! PCMCI+ causal discovery on a stacked panel.
//!
//! Lagged parents are preselected per variable ([`pc1_parents`]), then a
//! momentary-conditional-independence skeleton over lagged and
//! contemporaneous links is pruned and its contemporaneous part oriented
//! ([`mci_graph`]). All tests share one sample that starts at `2·tau_max`
//! in every entity so that shifted parent sets are always observed.

mod mci;
mod parcorr;
mod pc1;
mod samples;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use mci::{mci_graph, MciLink, MciOutcome, Triple, TripleVote};
pub use parcorr::{node_test, parcorr_test, CiTestResult};
pub use pc1::{pc1_parents, ParentLink};
pub use samples::{LaggedData, Node, Weighting};

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::num::Scalar;
use crate::panel::Panel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcmciConfig {
    pub tau_max: usize,
    /// Significance level of the skeleton and orientation tests.
    pub alpha: f64,
    /// Significance level of parent preselection; `alpha` when unset.
    pub alpha_pc: Option<f64>,
    /// Largest conditioning-set increment tried in either phase.
    pub max_conds: usize,
    /// Cap on contemporaneous subsets tried per link and level.
    pub max_subsets: usize,
    pub weighting: Weighting,
}

impl Default for PcmciConfig {
    fn default() -> Self {
        PcmciConfig {
            tau_max: 3,
            alpha: 0.05,
            alpha_pc: None,
            max_conds: 10,
            max_subsets: 100,
            weighting: Weighting::None,
        }
    }
}

impl PcmciConfig {
    pub fn alpha_pc(&self) -> f64 {
        self.alpha_pc.unwrap_or(self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_max == 0 {
            return Err(Error::InvalidParameter("tau_max must be at least 1".into()));
        }
        for (name, a) in [("alpha", self.alpha), ("alpha_pc", self.alpha_pc())] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1], got {a}")));
            }
        }
        if self.max_subsets == 0 {
            return Err(Error::InvalidParameter("max_subsets must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcmciResult {
    pub graph: CausalGraph,
    /// Preselected lagged parents per variable, strongest first.
    pub parents: Vec<Vec<ParentLink>>,
    pub links: Vec<MciLink>,
    pub triples: Vec<Triple>,
    pub sample_size: usize,
    pub tests_run: usize,
    pub config: PcmciConfig,
}

pub fn run_pcmci_plus<T: Scalar>(data: &Panel<T>, config: &PcmciConfig) -> Result<PcmciResult> {
    config.validate()?;
    let lagged = LaggedData::from_panel(data, 2 * config.tau_max, config.weighting)?;
    let min_rows = data.n_vars() * config.tau_max + config.max_conds + 4;
    if lagged.n_samples() < min_rows {
        return Err(Error::InsufficientData(format!(
            "{} aligned samples; at least {min_rows} needed",
            lagged.n_samples()
        )));
    }
    log::info!(
        "PCMCI+: {} variables, tau_max {}, {} aligned samples",
        data.n_vars(),
        config.tau_max,
        lagged.n_samples()
    );
    let parents = (0..data.n_vars())
        .into_par_iter()
        .map(|j| pc1_parents(&lagged, j, config))
        .collect::<Result<Vec<_>>>()?;
    let outcome = mci_graph(&lagged, &parents, config)?;
    Ok(PcmciResult {
        graph: outcome.graph,
        parents,
        links: outcome.links,
        triples: outcome.triples,
        sample_size: lagged.n_samples(),
        tests_run: outcome.tests_run,
        config: config.clone(),
    })
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use crate::panel::Panel;

    /// Panel whose rows come from `step(history, t, shocks)`; 30 burn-in periods.
    pub fn simulate(
        n: usize,
        t: usize,
        k: usize,
        seed: u64,
        step: impl Fn(&[Vec<f64>], usize, &[f64]) -> Vec<f64>,
    ) -> Panel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, 1.0).unwrap();
        let mut values = Vec::new();
        for _ in 0..n {
            let mut hist: Vec<Vec<f64>> = Vec::new();
            for s in 0..t + 30 {
                let e: Vec<f64> = (0..k).map(|_| dist.sample(&mut rng)).collect();
                let row = step(&hist, s, &e);
                hist.push(row);
            }
            values.push(hist.split_off(30));
        }
        let names = (0..k).map(|v| format!("v{v}")).collect();
        Panel::from_fn(
            (0..n).map(|i| format!("e{i}")).collect(),
            (0..t as i32).collect(),
            names,
            |i, y, v| Some(values[i][y][v]),
        )
        .unwrap()
    }

    pub fn lag(h: &[Vec<f64>], l: usize, v: usize) -> f64 {
        if h.len() >= l {
            h[h.len() - l][v]
        } else {
            0.0
        }
    }
}
