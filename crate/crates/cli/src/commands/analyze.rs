//! Centrality, tiers and per-income-group heterogeneity.

use std::collections::BTreeMap;
use std::path::Path;

use panelcausal::analysis::{centrality, directness_from_graph, heterogeneity_run, tier_classify};
use panelcausal::panel::{load_groups, split_by_group};
use panelcausal::CausalGraph;

use super::{differenced_input, num, opt_num, pipeline_params, resolve_lag};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{checksum, write_manifest, InputRecord, Outputs};

fn read_graph(path: &Path) -> CliResult<CausalGraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot access {}: {e}", path.display())))?;
    CausalGraph::from_json(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn graph_outputs(config: &RunConfig, out: &mut Outputs, inputs: &mut Vec<InputRecord>) -> CliResult<()> {
    let mut load = |role: &str, path: &Option<std::path::PathBuf>| -> CliResult<Option<CausalGraph>> {
        let Some(p) = path else { return Ok(None) };
        let g = read_graph(p)?;
        inputs.push(checksum(role, p)?);
        Ok(Some(g))
    };
    let granger = load("granger_graph", &config.granger_graph)?;
    let pcmci = load("pcmci_graph", &config.pcmci_graph)?;
    // degrees from the Granger network, directness from the PCMCI+ graph
    let Some(degree_graph) = granger.as_ref().or(pcmci.as_ref()) else {
        return Ok(());
    };
    let direct_graph = pcmci.as_ref().unwrap_or(degree_graph);
    let table = centrality(degree_graph);
    let tiers = tier_classify(&table, &directness_from_graph(direct_graph));
    out.write_csv("centrality.csv", |w| {
        w.write_record(["node", "in_degree", "out_degree", "total", "role"])?;
        for r in table.ranked() {
            w.write_record([
                r.node.clone(),
                r.in_degree.to_string(),
                r.out_degree.to_string(),
                r.total.to_string(),
                r.role.to_string(),
            ])?;
        }
        Ok(())
    })?;
    out.write_csv("tiers.csv", |w| {
        w.write_record(["node", "tier", "description", "rationale"])?;
        for r in &tiers.rows {
            w.write_record([
                r.node.as_str(),
                &r.tier.to_string(),
                r.tier.description(),
                r.rationale.as_str(),
            ])?;
        }
        Ok(())
    })?;
    Ok(())
}

fn heterogeneity_outputs(config: &RunConfig, out: &mut Outputs, inputs: &mut Vec<InputRecord>) -> CliResult<()> {
    let Some(groups_path) = &config.groups else {
        return Ok(());
    };
    let (diffed, input) = differenced_input(config)?;
    inputs.push(input);
    let groups = load_groups(groups_path, config.group_column.as_deref())?;
    inputs.push(checksum("groups", groups_path)?);
    let unmatched = diffed.entities().iter().filter(|e| !groups.contains_key(*e)).count();
    if unmatched == diffed.n_entities() {
        return Err(CliError::data(format!(
            "{} assigns a group to none of the panel entities",
            groups_path.display()
        )));
    }
    if unmatched > 0 {
        log::warn!("{unmatched} entities have no income group and are left out of the group runs");
    }
    let (p, _) = resolve_lag(config, &diffed)?;
    let vars = diffed.variables().to_vec();
    let split = split_by_group(&diffed.with_groups(groups), config.min_group_entities)?;
    let panels: BTreeMap<String, _> = split.into_iter().map(|(g, p)| (g.short().to_string(), p)).collect();
    let tracked = if config.tracked.is_empty() {
        vars.iter()
            .flat_map(|s| vars.iter().filter(move |t| *t != s).map(move |t| (s.clone(), t.clone())))
            .collect()
    } else {
        config.tracked.clone()
    };
    let report = heterogeneity_run(&panels, &pipeline_params(config, p, false), &tracked)?;
    for g in &report.groups {
        if let Err(e) = &g.result {
            log::warn!("group {} failed: {e}", g.group);
        }
    }
    out.write_csv("heterogeneity.csv", |w| {
        w.write_record(["group", "source", "target", "horizon", "peak", "lower", "upper", "band_contains_zero"])?;
        for r in &report.comparison {
            w.write_record([
                r.group.clone(),
                r.source.clone(),
                r.target.clone(),
                r.horizon.to_string(),
                num(r.peak),
                opt_num(r.lower),
                opt_num(r.upper),
                r.band_contains_zero.map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    })?;
    out.write("heterogeneity.json", report.comparison_json() + "\n")?;
    Ok(())
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let dir = config.require_output()?;
    if config.granger_graph.is_none() && config.pcmci_graph.is_none() && config.groups.is_none() {
        return Err(CliError::usage(
            "nothing to analyze: set granger_graph and/or pcmci_graph, or groups with an input panel",
        ));
    }
    let mut out = Outputs::create(dir)?;
    let mut inputs = Vec::new();
    graph_outputs(config, &mut out, &mut inputs)?;
    heterogeneity_outputs(config, &mut out, &mut inputs)?;
    write_manifest(&mut out, "analyze", config, &inputs)?;
    out.commit();
    Ok(())
}
