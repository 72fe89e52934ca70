//! Estimator validation: Monte Carlo, permutation falsification and
//! robustness sweeps.

mod dgp;
mod montecarlo;
mod permutation;
mod report;
mod robustness;

pub use dgp::{
    draw_coefficients, simulate_dgp, simulate_var_panel, DgpSpec, DrawnCoefficients, SimulatedPanel,
    VarDgp, BURN_IN,
};
pub use montecarlo::{monte_carlo_validate, McReport, BIAS_TARGET, COVERAGE_TARGET};
pub use permutation::{permutation_falsification, permute_entities, PermutationConfig, PermutationReport};
pub use report::ValidationReport;
pub use robustness::{robustness_sweep, RobustnessConfig, RobustnessRow, SweepSpec};
