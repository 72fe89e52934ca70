//! Per-group estimation and comparison of tracked impulse responses.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{run_pipeline, PipelineParams, PipelineResult};
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::pvar::IrfResult;

#[derive(Debug, Clone)]
pub struct GroupOutcome {
    pub group: String,
    pub n_entities: usize,
    /// Error text when this group's pipeline failed.
    pub result: std::result::Result<PipelineResult, String>,
}

/// Peak response of `target` to a `source` shock within one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRow {
    pub group: String,
    pub source: String,
    pub target: String,
    pub horizon: usize,
    pub peak: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub band_contains_zero: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapFlag {
    pub source: String,
    pub target: String,
    pub group_a: String,
    pub group_b: String,
    /// The two peak bands are disjoint.
    pub non_overlapping: bool,
}

#[derive(Debug, Clone)]
pub struct HeterogeneityReport {
    pub groups: Vec<GroupOutcome>,
    pub comparison: Vec<PeakRow>,
    pub flags: Vec<OverlapFlag>,
}

#[derive(Serialize)]
struct ComparisonJson<'a> {
    groups: Vec<GroupSummary<'a>>,
    comparison: &'a [PeakRow],
    flags: &'a [OverlapFlag],
}

#[derive(Serialize)]
struct GroupSummary<'a> {
    group: &'a str,
    n_entities: usize,
    nobs: Option<usize>,
    granger_links: Option<usize>,
    error: Option<&'a str>,
}

impl HeterogeneityReport {
    pub fn group(&self, name: &str) -> Option<&GroupOutcome> {
        self.groups.iter().find(|g| g.group == name)
    }

    pub fn peak(&self, group: &str, source: &str, target: &str) -> Option<&PeakRow> {
        self.comparison
            .iter()
            .find(|r| r.group == group && r.source == source && r.target == target)
    }

    pub fn any_flagged(&self) -> bool {
        self.flags.iter().any(|f| f.non_overlapping)
    }

    pub fn comparison_json(&self) -> String {
        let groups = self
            .groups
            .iter()
            .map(|g| GroupSummary {
                group: &g.group,
                n_entities: g.n_entities,
                nobs: g.result.as_ref().ok().map(|r| r.model.nobs),
                granger_links: g.result.as_ref().ok().map(|r| r.network.edges.len()),
                error: g.result.as_ref().err().map(String::as_str),
            })
            .collect();
        serde_json::to_string_pretty(&ComparisonJson {
            groups,
            comparison: &self.comparison,
            flags: &self.flags,
        })
        .expect("comparison serializes")
    }
}

/// Largest-magnitude response over horizons `from..=horizon`; the earliest
/// wins ties.
pub fn peak_response(irf: &IrfResult<f64>, source: usize, target: usize, from: usize) -> (usize, f64, Option<(f64, f64)>) {
    let mut best = from.min(irf.horizon());
    for h in best + 1..=irf.horizon() {
        if irf.response(h, source, target).abs() > irf.response(best, source, target).abs() {
            best = h;
        }
    }
    (best, irf.response(best, source, target), irf.band(best, source, target))
}

/// Runs the identical pipeline on each group panel. A failing group is
/// reported in its outcome and does not stop the others.
pub fn heterogeneity_run(
    panels: &BTreeMap<String, Panel<f64>>,
    params: &PipelineParams,
    tracked: &[(String, String)],
) -> Result<HeterogeneityReport> {
    if panels.is_empty() {
        return Err(Error::InvalidParameter("no group panels supplied".into()));
    }
    for panel in panels.values() {
        for (s, t) in tracked {
            for v in [s, t] {
                if panel.variable_index(v).is_none() {
                    return Err(Error::InvalidParameter(format!("tracked variable `{v}` not in panel")));
                }
            }
        }
    }
    let entries: Vec<(&String, &Panel<f64>)> = panels.iter().collect();
    let groups: Vec<GroupOutcome> = entries
        .par_iter()
        .map(|(name, panel)| GroupOutcome {
            group: (*name).clone(),
            n_entities: panel.n_entities(),
            result: run_pipeline(panel, params).map_err(|e| {
                log::warn!("group {name} failed: {e}");
                e.to_string()
            }),
        })
        .collect();

    let mut comparison = Vec::new();
    for g in &groups {
        let Ok(res) = &g.result else { continue };
        for (s, t) in tracked {
            let (si, ti) = (res.model.variable_index(s)?, res.model.variable_index(t)?);
            let (horizon, peak, band) = peak_response(&res.irf, si, ti, params.peak_from);
            comparison.push(PeakRow {
                group: g.group.clone(),
                source: s.clone(),
                target: t.clone(),
                horizon,
                peak,
                lower: band.map(|b| b.0),
                upper: band.map(|b| b.1),
                band_contains_zero: band.map(|(lo, hi)| lo <= 0.0 && hi >= 0.0),
            });
        }
    }

    let mut flags = Vec::new();
    for (s, t) in tracked {
        let rows: Vec<&PeakRow> = comparison.iter().filter(|r| &r.source == s && &r.target == t).collect();
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                if let (Some(al), Some(au), Some(bl), Some(bu)) = (a.lower, a.upper, b.lower, b.upper) {
                    flags.push(OverlapFlag {
                        source: s.clone(),
                        target: t.clone(),
                        group_a: a.group.clone(),
                        group_b: b.group.clone(),
                        non_overlapping: au < bl || bu < al,
                    });
                }
            }
        }
    }
    Ok(HeterogeneityReport {
        groups,
        comparison,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvar::BootstrapConfig;
    use crate::validation::{simulate_var_panel, VarDgp};
    use nalgebra::DMatrix;

    fn group_panel(effect: f64, n: usize, seed: u64) -> Panel<f64> {
        let phi = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, effect, 0.3]);
        let dgp = VarDgp::new(vec![phi], DMatrix::identity(2, 2)).with_names(&["edu", "ineq"]);
        simulate_var_panel(&dgp, n, 20, seed).unwrap()
    }

    fn params() -> PipelineParams {
        PipelineParams {
            p: 1,
            horizon: 5,
            bootstrap: Some(BootstrapConfig {
                reps: 50,
                seed: 3,
                ..BootstrapConfig::default()
            }),
            ..PipelineParams::default()
        }
    }

    fn tracked() -> Vec<(String, String)> {
        vec![("edu".into(), "ineq".into())]
    }

    #[test]
    fn three_groups_three_results() {
        let panels = BTreeMap::from([
            ("HIC".to_string(), group_panel(-0.3, 60, 1)),
            ("UMIC".to_string(), group_panel(-0.15, 60, 2)),
            ("LMIC".to_string(), group_panel(0.0, 60, 3)),
        ]);
        let rep = heterogeneity_run(&panels, &params(), &tracked()).unwrap();
        assert_eq!(rep.groups.len(), 3);
        assert!(rep.groups.iter().all(|g| g.result.is_ok()));
        assert_eq!(rep.comparison.len(), 3);
        assert_eq!(rep.flags.len(), 3);
        let hic = rep.peak("HIC", "edu", "ineq").unwrap();
        assert_eq!(hic.horizon, 1);
        assert!(hic.peak < rep.peak("UMIC", "edu", "ineq").unwrap().peak);
        let json: serde_json::Value = serde_json::from_str(&rep.comparison_json()).unwrap();
        assert_eq!(json["comparison"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn single_group_matches_pooled_run() {
        let panel = group_panel(-0.2, 40, 5);
        let pooled = run_pipeline(&panel, &params()).unwrap();
        let rep = heterogeneity_run(&BTreeMap::from([("all".to_string(), panel)]), &params(), &tracked()).unwrap();
        let grouped = rep.groups[0].result.as_ref().unwrap();
        assert_eq!(grouped.model.coeffs, pooled.model.coeffs);
        assert_eq!(grouped.irf.responses, pooled.irf.responses);
        assert_eq!(grouped.irf.ci_lower, pooled.irf.ci_lower);
        assert_eq!(grouped.irf.ci_upper, pooled.irf.ci_upper);
        assert_eq!(grouped.network, pooled.network);
    }

    #[test]
    fn failing_group_is_isolated() {
        let tiny = group_panel(0.0, 2, 9).select_years(2000, 2002).unwrap();
        let panels = BTreeMap::from([("ok".to_string(), group_panel(-0.2, 40, 1)), ("tiny".to_string(), tiny)]);
        let rep = heterogeneity_run(&panels, &params(), &tracked()).unwrap();
        assert!(rep.group("ok").unwrap().result.is_ok());
        assert!(rep.group("tiny").unwrap().result.is_err());
        assert_eq!(rep.comparison.len(), 1);
        assert!(rep.flags.is_empty());
    }

    #[test]
    fn unknown_tracked_variable_is_rejected() {
        let panels = BTreeMap::from([("a".to_string(), group_panel(0.0, 10, 1))]);
        let bad = vec![("edu".to_string(), "health".to_string())];
        assert!(heterogeneity_run(&panels, &params(), &bad).is_err());
    }
}
