pub mod analyze;
pub mod discover;
pub mod preprocess;
pub mod sweep;
pub mod validate;

use panelcausal::analysis::PipelineParams;
use panelcausal::panel::{clean_panel, load_panel};
use panelcausal::pcmci::PcmciConfig;
use panelcausal::preprocess::{first_difference, within_transform, TransformLog};
use panelcausal::pvar::{select_lag, BootstrapConfig, LagSelection};
use panelcausal::Panel;

use crate::config::{LagChoice, RunConfig};
use crate::error::CliResult;
use crate::output::{checksum, InputRecord};

/// Loads `input`, keeping only the configured variables.
pub fn load_input(config: &RunConfig, log: &mut TransformLog) -> CliResult<(Panel<f64>, InputRecord)> {
    let path = config.require_input()?;
    let loaded = load_panel::<f64>(path, config.layout)?;
    let record = checksum("input", path)?;
    log.notes.push(format!(
        "loaded {}: {} entities, {} years, {} variables; {} blank and {} unparseable cells",
        path.display(),
        loaded.panel.n_entities(),
        loaded.panel.n_years(),
        loaded.panel.n_vars(),
        loaded.blank_cells,
        loaded.unparseable_cells
    ));
    let panel = if config.variables.is_empty() {
        loaded.panel
    } else {
        let names: Vec<&str> = config.variables.iter().map(String::as_str).collect();
        let selected = loaded.panel.select_variables(&names)?;
        log.record(
            "select_variables",
            &[("variables", config.variables.join(","))],
            &loaded.panel,
            &selected,
        );
        selected
    };
    Ok((panel, record))
}

/// Drops sparse entities and interpolates interior gaps.
pub fn clean(config: &RunConfig, panel: &Panel<f64>, log: &mut TransformLog) -> CliResult<Panel<f64>> {
    let report = clean_panel(panel, config.max_missing)?;
    log.record(
        "clean",
        &[
            ("max_missing", config.max_missing.to_string()),
            ("interpolated_cells", report.interpolated_cells.to_string()),
            ("edge_gap_cells", report.edge_gap_cells.to_string()),
        ],
        panel,
        &report.panel,
    );
    if !report.dropped.is_empty() {
        let names: Vec<String> = report
            .dropped
            .iter()
            .map(|d| format!("{} ({:.2})", d.entity, d.missing_fraction))
            .collect();
        log.notes.push(format!(
            "dropped {} entities above missing fraction {}: {}",
            names.len(),
            config.max_missing,
            names.join(", ")
        ));
    }
    Ok(report.panel)
}

/// The differenced panel the estimators work on: `input` as is, or
/// cleaned and differenced when `auto_preprocess` is set.
pub fn differenced_input(config: &RunConfig) -> CliResult<(Panel<f64>, InputRecord)> {
    let mut log = TransformLog::default();
    let (panel, record) = load_input(config, &mut log)?;
    if !config.auto_preprocess {
        return Ok((panel, record));
    }
    let cleaned = clean(config, &panel, &mut log)?;
    Ok((first_difference(&cleaned)?, record))
}

pub fn resolve_lag(config: &RunConfig, diffed: &Panel<f64>) -> CliResult<(usize, Option<LagSelection>)> {
    match config.p {
        LagChoice::Fixed(p) => Ok((p, None)),
        LagChoice::Auto => {
            let sel = select_lag(&within_transform(diffed), config.p_max)?;
            log::info!("lag order {} selected by AIC (BIC prefers {})", sel.chosen, sel.chosen_bic);
            Ok((sel.chosen, Some(sel)))
        }
    }
}

pub fn pcmci_config(config: &RunConfig, tau_max: usize) -> PcmciConfig {
    PcmciConfig {
        tau_max,
        alpha: config.alpha,
        alpha_pc: config.alpha_pc,
        weighting: config.weighting,
        ..PcmciConfig::default()
    }
}

pub fn pipeline_params(config: &RunConfig, p: usize, with_pcmci: bool) -> PipelineParams {
    PipelineParams {
        p,
        alpha: config.alpha,
        horizon: config.horizon,
        ordering: config.ordering(),
        bootstrap: (config.bootstrap_reps > 0).then(|| BootstrapConfig {
            reps: config.bootstrap_reps,
            seed: config.seed,
            ..BootstrapConfig::default()
        }),
        pcmci: with_pcmci.then(|| pcmci_config(config, config.tau_max)),
        ..PipelineParams::default()
    }
}

/// Shortest text that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
