//! Specification sweep over lag order, sample period and fixed effects.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::permutation::granger_pipeline;
use crate::error::{Error, Result};
use crate::panel::Panel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepSpec {
    /// Lag order `p` with fixed effects.
    Lag { p: usize },
    /// Base lag order on the years `first_year..=last_year`.
    Period { label: String, first_year: i32, last_year: i32 },
    /// Base lag order with the within transformation on or off.
    FixedEffects { enabled: bool },
}

impl SweepSpec {
    pub fn label(&self) -> String {
        match self {
            SweepSpec::Lag { p } => format!("VAR({p})"),
            SweepSpec::Period { label, .. } => label.clone(),
            SweepSpec::FixedEffects { enabled: true } => "With FE".into(),
            SweepSpec::FixedEffects { enabled: false } => "No FE".into(),
        }
    }

    /// Lags 1 to 3, a split at `split_year` and fixed effects on and off.
    pub fn standard(split_year: i32, first_year: i32, last_year: i32) -> Vec<SweepSpec> {
        vec![
            SweepSpec::Lag { p: 1 },
            SweepSpec::Lag { p: 2 },
            SweepSpec::Lag { p: 3 },
            SweepSpec::Period {
                label: format!("Pre-{split_year}"),
                first_year,
                last_year: split_year - 1,
            },
            SweepSpec::Period {
                label: format!("Post-{split_year}"),
                first_year: split_year,
                last_year,
            },
            SweepSpec::FixedEffects { enabled: true },
            SweepSpec::FixedEffects { enabled: false },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    /// Lag order for the period and fixed-effects rows.
    pub p: usize,
    pub alpha: f64,
    /// `(source, target)` pairs whose coefficients are reported in every row.
    pub tracked: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub label: String,
    pub spec: SweepSpec,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub links: Option<usize>,
    /// Significant `(source, target)` pairs, source-major.
    pub significant: Vec<(String, String)>,
    pub nobs: Option<usize>,
    /// Largest-magnitude lag coefficient of each tracked pair, in `tracked` order.
    pub tracked: Vec<Option<f64>>,
    pub failed: Option<String>,
}

fn run_row(data: &Panel<f64>, spec: &SweepSpec, config: &RobustnessConfig) -> Result<RobustnessRow> {
    let (sample, p, fe) = match spec {
        SweepSpec::Lag { p } => (data.clone(), *p, true),
        SweepSpec::Period {
            first_year, last_year, ..
        } => (data.select_years(*first_year, *last_year)?, config.p, true),
        SweepSpec::FixedEffects { enabled } => (data.clone(), config.p, *enabled),
    };
    let (model, tests) = granger_pipeline(&sample, p, config.alpha, fe)?;
    let tracked = config
        .tracked
        .iter()
        .map(|(s, t)| {
            let (si, ti) = (model.variable_index(s)?, model.variable_index(t)?);
            Ok((1..=model.p)
                .map(|l| model.coefficient(l, ti, si))
                .fold(0.0f64, |best, c| if c.abs() > best.abs() { c } else { best }))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RobustnessRow {
        label: spec.label(),
        spec: spec.clone(),
        aic: Some(model.aic),
        bic: Some(model.bic),
        links: Some(tests.iter().filter(|t| t.significant).count()),
        significant: tests
            .iter()
            .filter(|t| t.significant)
            .map(|t| (t.source.clone(), t.target.clone()))
            .collect(),
        nobs: Some(model.nobs),
        tracked: tracked.into_iter().map(Some).collect(),
        failed: None,
    })
}

/// One row per spec. Rows whose data or estimation fail are kept and
/// marked with the reason; an unknown tracked variable is a usage error.
pub fn robustness_sweep(data: &Panel<f64>, specs: &[SweepSpec], config: &RobustnessConfig) -> Result<Vec<RobustnessRow>> {
    for (s, t) in &config.tracked {
        for v in [s, t] {
            if data.variable_index(v).is_none() {
                return Err(Error::InvalidParameter(format!("tracked variable `{v}` not in panel")));
            }
        }
    }
    Ok(specs
        .par_iter()
        .map(|spec| {
            run_row(data, spec, config).unwrap_or_else(|e| {
                log::warn!("robustness spec {} failed: {e}", spec.label());
                RobustnessRow {
                    label: spec.label(),
                    spec: spec.clone(),
                    aic: None,
                    bic: None,
                    links: None,
                    significant: Vec::new(),
                    nobs: None,
                    tracked: vec![None; config.tracked.len()],
                    failed: Some(e.to_string()),
                }
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::{simulate_var_panel, VarDgp};
    use nalgebra::DMatrix;

    fn config() -> RobustnessConfig {
        RobustnessConfig {
            p: 2,
            alpha: 0.05,
            tracked: vec![("x1".into(), "x2".into())],
        }
    }

    const CROSS: f64 = 0.2;
    const FE_SD: f64 = 3.0;

    fn panel(fe_sd: f64, seed: u64) -> Panel<f64> {
        let mut phi = DMatrix::from_diagonal_element(3, 3, 0.4);
        phi[(1, 0)] = CROSS;
        phi[(2, 1)] = CROSS;
        let dgp = VarDgp::new(vec![phi], DMatrix::identity(3, 3)).with_fixed_effects(fe_sd);
        simulate_var_panel(&dgp, 60, 20, seed).unwrap()
    }

    #[test]
    fn standard_rows_and_labels() {
        let p = panel(0.0, 1);
        let specs = SweepSpec::standard(2010, 2000, 2019);
        let rows = robustness_sweep(&p, &specs, &config()).unwrap();
        let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["VAR(1)", "VAR(2)", "VAR(3)", "Pre-2010", "Post-2010", "With FE", "No FE"]);
        assert!(rows.iter().all(|r| r.failed.is_none()));
        assert_eq!(rows[1].aic, rows[5].aic);
        assert!(rows[0].tracked[0].unwrap() > 0.1);
    }

    #[test]
    fn infeasible_period_marks_the_row() {
        let p = panel(0.0, 2);
        let specs = vec![
            SweepSpec::Period {
                label: "tiny".into(),
                first_year: 2000,
                last_year: 2001,
            },
            SweepSpec::Lag { p: 1 },
        ];
        let rows = robustness_sweep(&p, &specs, &config()).unwrap();
        assert!(rows[0].failed.is_some());
        assert_eq!(rows[0].tracked, vec![None]);
        assert!(rows[1].failed.is_none());
    }

    #[test]
    fn unknown_tracked_variable() {
        let mut cfg = config();
        cfg.tracked.push(("nope".into(), "x1".into()));
        assert!(robustness_sweep(&panel(0.0, 1), &[SweepSpec::Lag { p: 1 }], &cfg).is_err());
    }

    #[test]
    fn dropping_fixed_effects_loses_true_links_under_heterogeneity() {
        let specs = [SweepSpec::FixedEffects { enabled: true }, SweepSpec::FixedEffects { enabled: false }];
        let cfg = RobustnessConfig { p: 1, ..config() };
        let truth = [("x1", "x2"), ("x2", "x3")];
        let hits = |r: &RobustnessRow| {
            r.significant
                .iter()
                .filter(|(s, t)| truth.contains(&(s.as_str(), t.as_str())))
                .count()
        };
        let (mut with, mut without) = (0, 0);
        for seed in 0..20 {
            let rows = robustness_sweep(&panel(FE_SD, seed), &specs, &cfg).unwrap();
            with += hits(&rows[0]);
            without += hits(&rows[1]);
        }
        assert!(with > without, "with FE {with}, without {without}");
    }

    #[test]
    fn deterministic() {
        let p = panel(1.0, 3);
        let specs = SweepSpec::standard(2010, 2000, 2019);
        assert_eq!(
            robustness_sweep(&p, &specs, &config()).unwrap(),
            robustness_sweep(&p, &specs, &config()).unwrap()
        );
    }
}
