//! Cleaning, differencing, unit-root screening and demeaning.

use panelcausal::panel::write_panel;
use panelcausal::preprocess::{stationarize, TransformLog};
use panelcausal::Panel;

use super::{clean, load_input};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_manifest, Outputs};

fn panel_csv(panel: &Panel<f64>, config: &RunConfig) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_panel(panel, &mut buf, config.layout)?;
    Ok(buf)
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let dir = config.require_output()?;
    let mut log = TransformLog::default();
    let (raw, input) = load_input(config, &mut log)?;
    let cleaned = clean(config, &raw, &mut log)?;
    let (demeaned, diffed) = stationarize(&cleaned, config.adf_alpha, &mut log)?;
    if !log.reconciles() {
        return Err(CliError::data("transform log does not reconcile row counts"));
    }
    for s in &log.steps {
        log::info!("{}: {} -> {} rows ({} lost)", s.operation, s.rows_in, s.rows_out, s.rows_lost);
    }
    for a in log.adf_results.iter().filter(|a| !a.reject) {
        log::warn!("variable `{}` fails the ADF screen after differencing (median p {:.3})", a.variable, a.median_p_value);
    }

    let mut out = Outputs::create(dir)?;
    out.write("differenced.csv", panel_csv(&diffed, config)?)?;
    out.write("transformed.csv", panel_csv(&demeaned, config)?)?;
    let text = serde_json::to_string_pretty(&log).expect("log serializes");
    out.write("transform_log.json", text + "\n")?;
    write_manifest(&mut out, "preprocess", config, &[input])?;
    out.commit();
    Ok(())
}
