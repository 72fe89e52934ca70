//! Network summaries, tiering and income-group comparisons over fitted results.

mod centrality;
mod heterogeneity;
mod pipeline;
mod tiers;

pub use centrality::{centrality, centrality_with, CentralityTable, DegreeOrder, NodeCentrality, Role, RoleRule, RoleRules};
pub use heterogeneity::{heterogeneity_run, peak_response, GroupOutcome, HeterogeneityReport, OverlapFlag, PeakRow};
pub use pipeline::{run_pipeline, PipelineParams, PipelineResult};
pub use tiers::{directness_from_graph, tier_classify, Tier, TierAssignment, TierRow};
