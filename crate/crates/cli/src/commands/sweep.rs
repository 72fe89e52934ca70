//! PCMCI+ sensitivity to tau_max and Granger sensitivity to the lag order.

use panelcausal::pcmci::run_pcmci_plus;
use panelcausal::preprocess::within_transform;
use panelcausal::validation::{robustness_sweep, RobustnessConfig, SweepSpec};
use panelcausal::EdgeKind;

use super::{differenced_input, opt_num, pcmci_config, resolve_lag};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{write_manifest, Outputs};

pub fn run(config: &RunConfig) -> CliResult<()> {
    let dir = config.require_output()?;
    let (diffed, input) = differenced_input(config)?;
    let demeaned = within_transform(&diffed);
    let (p, _) = resolve_lag(config, &diffed)?;

    let tau_rows: Vec<Vec<String>> = config
        .tau_sweep
        .iter()
        .map(|&tau| match run_pcmci_plus(&demeaned, &pcmci_config(config, tau)) {
            Ok(r) => {
                let g = &r.graph;
                let lagged = g.edges.iter().filter(|e| e.kind == EdgeKind::Lagged).count();
                let edges: Vec<String> = g
                    .edges
                    .iter()
                    .map(|e| format!("{}->{}@{}", e.source, e.target, e.lag))
                    .collect();
                vec![
                    tau.to_string(),
                    g.edges.len().to_string(),
                    lagged.to_string(),
                    (g.edges.len() - lagged).to_string(),
                    g.conflicts.len().to_string(),
                    r.sample_size.to_string(),
                    r.tests_run.to_string(),
                    edges.join(";"),
                    String::new(),
                ]
            }
            Err(e) => {
                log::warn!("tau_max {tau} failed: {e}");
                let mut row = vec![tau.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(e.to_string());
                row
            }
        })
        .collect();

    let specs: Vec<SweepSpec> = config.lag_sweep.iter().map(|&p| SweepSpec::Lag { p }).collect();
    let lag_rows = robustness_sweep(
        &diffed,
        &specs,
        &RobustnessConfig {
            p,
            alpha: config.alpha,
            tracked: config.tracked.clone(),
        },
    )?;

    let mut out = Outputs::create(dir)?;
    out.write_csv("sweep_tau.csv", |w| {
        w.write_record([
            "tau_max",
            "edges",
            "lagged",
            "contemporaneous",
            "conflicts",
            "sample_size",
            "tests_run",
            "edge_list",
            "error",
        ])?;
        for row in &tau_rows {
            w.write_record(row)?;
        }
        Ok(())
    })?;
    out.write_csv("sweep_lag.csv", |w| {
        let mut header: Vec<String> = ["model", "aic", "bic", "links", "nobs"].map(String::from).to_vec();
        header.extend(config.tracked.iter().map(|(s, t)| format!("{s}->{t}")));
        header.push("error".into());
        w.write_record(&header)?;
        for r in &lag_rows {
            let mut row = vec![
                r.label.clone(),
                opt_num(r.aic),
                opt_num(r.bic),
                r.links.map(|l| l.to_string()).unwrap_or_default(),
                r.nobs.map(|n| n.to_string()).unwrap_or_default(),
            ];
            row.extend(r.tracked.iter().map(|v| opt_num(*v)));
            row.push(r.failed.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        Ok(())
    })?;
    write_manifest(&mut out, "sweep", config, &[input])?;
    out.commit();
    Ok(())
}
