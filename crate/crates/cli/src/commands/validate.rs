//! Monte Carlo, permutation falsification and robustness sweep.

use panelcausal::validation::{
    monte_carlo_validate, permutation_falsification, robustness_sweep, DgpSpec, PermutationConfig,
    RobustnessConfig, SweepSpec,
};
use panelcausal::ValidationReport;

use super::{differenced_input, resolve_lag};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_manifest, Outputs};

pub fn run(config: &RunConfig) -> CliResult<()> {
    let dir = config.require_output()?;
    if config.mc_reps == 0 && config.input.is_none() {
        return Err(CliError::usage("nothing to validate: mc_reps is 0 and no input panel is set"));
    }
    let mut report = ValidationReport::default();
    let mut inputs = Vec::new();

    if config.mc_reps > 0 {
        let spec = DgpSpec {
            k: config.mc_variables,
            n: config.mc_entities,
            t: config.mc_years,
            seed: config.seed,
            ..DgpSpec::default()
        };
        let mc = monte_carlo_validate(&spec, config.mc_reps, true)?;
        log::info!("Monte Carlo: bias {:.4}, coverage {:.3}", mc.mean_abs_bias, mc.ci_coverage);
        report.mc = Some(mc);
    }

    if config.input.is_some() {
        let (diffed, input) = differenced_input(config)?;
        inputs.push(input);
        let (p, _) = resolve_lag(config, &diffed)?;
        if config.permutation_reps > 0 {
            let perm = permutation_falsification(
                &diffed,
                &PermutationConfig {
                    reps: config.permutation_reps,
                    alpha: config.alpha,
                    p,
                    seed: config.seed,
                },
            )?;
            log::info!("permutation: {}", perm.summary());
            report.permutation = Some(perm);
        }
        let years = diffed.years();
        let specs = SweepSpec::standard(config.split_year, years[0], years[years.len() - 1]);
        report.robustness = robustness_sweep(
            &diffed,
            &specs,
            &RobustnessConfig {
                p,
                alpha: config.alpha,
                tracked: config.tracked.clone(),
            },
        )?;
        report.tracked = config.tracked.iter().map(|(s, t)| format!("{s}->{t}")).collect();
        report.notes.push(format!(
            "robustness rows use VAR({p}) unless the row sets the lag; alpha {}",
            config.alpha
        ));
    }

    let mut out = Outputs::create(dir)?;
    out.write("validation.json", report.to_json() + "\n")?;
    out.write("validation.txt", report.to_text())?;
    write_manifest(&mut out, "validate", config, &inputs)?;
    out.commit();
    Ok(())
}
