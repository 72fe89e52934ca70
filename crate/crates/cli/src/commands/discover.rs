//! Granger network, PCMCI+ graph, impulse responses and FEVD.

use panelcausal::analysis::run_pipeline;
use panelcausal::pvar::GrangerResult;

use super::{differenced_input, num, opt_num, pipeline_params, resolve_lag};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{write_manifest, Outputs};

/// k × k p-value matrix, row = source, column = target, blank diagonal.
fn granger_matrix(w: &mut csv::Writer<Vec<u8>>, vars: &[String], tests: &[GrangerResult]) -> csv::Result<()> {
    let mut header = vec!["source".to_string()];
    header.extend(vars.iter().cloned());
    w.write_record(&header)?;
    for s in vars {
        let mut row = vec![s.clone()];
        for t in vars {
            let cell = tests
                .iter()
                .find(|r| &r.source == s && &r.target == t)
                .map(|r| num(r.p_value))
                .unwrap_or_default();
            row.push(cell);
        }
        w.write_record(&row)?;
    }
    Ok(())
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let dir = config.require_output()?;
    let (diffed, input) = differenced_input(config)?;
    let (p, selection) = resolve_lag(config, &diffed)?;
    let result = run_pipeline(&diffed, &pipeline_params(config, p, true))?;
    let vars = result.model.variables.clone();
    log::info!(
        "VAR({p}) on {} observations; {} Granger links",
        result.model.nobs,
        result.network.edges.len()
    );

    let mut out = Outputs::create(dir)?;
    if let Some(sel) = &selection {
        out.write_csv("lag_selection.csv", |w| {
            w.write_record(["p", "aic", "bic", "nobs", "chosen"])?;
            for c in &sel.table {
                w.write_record([
                    c.p.to_string(),
                    num(c.aic),
                    num(c.bic),
                    c.nobs.to_string(),
                    (c.p == sel.chosen).to_string(),
                ])?;
            }
            Ok(())
        })?;
    }
    out.write_csv("granger.csv", |w| granger_matrix(w, &vars, &result.granger))?;
    out.write_csv("granger_tests.csv", |w| {
        w.write_record(["source", "target", "f_stat", "p_value", "df_num", "df_den", "significant"])?;
        for r in &result.granger {
            w.write_record([
                r.source.clone(),
                r.target.clone(),
                num(r.f_stat),
                num(r.p_value),
                r.df_num.to_string(),
                r.df_den.to_string(),
                r.significant.to_string(),
            ])?;
        }
        Ok(())
    })?;
    out.write("network.json", result.network.to_json() + "\n")?;
    out.write("network.dot", result.network.to_dot())?;
    if let Some(pc) = &result.pcmci {
        out.write("graph.json", pc.graph.to_json() + "\n")?;
        out.write("graph.dot", pc.graph.to_dot())?;
    }
    out.write_csv("irf.csv", |w| {
        w.write_record(["horizon", "impulse", "response", "value", "lower", "upper"])?;
        for (h, i, r, v, lo, hi) in result.irf.long_rows() {
            w.write_record([h.to_string(), i, r, num(v), opt_num(lo), opt_num(hi)])?;
        }
        Ok(())
    })?;
    out.write_csv("fevd.csv", |w| {
        w.write_record(["horizon", "variable", "shock", "share"])?;
        for (h, v, s, share) in result.fevd.long_rows() {
            w.write_record([h.to_string(), v, s, num(share)])?;
        }
        Ok(())
    })?;
    write_manifest(&mut out, "discover", config, &[input])?;
    out.commit();
    Ok(())
}
