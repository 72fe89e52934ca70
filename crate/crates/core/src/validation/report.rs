//! Combined validation report with JSON and plain-text renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::montecarlo::McReport;
use super::permutation::PermutationReport;
use super::robustness::RobustnessRow;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mc: Option<McReport>,
    pub permutation: Option<PermutationReport>,
    pub robustness: Vec<RobustnessRow>,
    /// Column labels for the tracked coefficients, e.g. `x1->x2`.
    pub tracked: Vec<String>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(mc) = &self.mc {
            let _ = writeln!(out, "Monte Carlo validation");
            let _ = writeln!(out, "{:<18}{:>10}{:>12}", "Metric", "Value", "Target");
            let _ = writeln!(
                out,
                "{:<18}{:>10.3}{:>12}",
                "Mean Abs. Bias",
                mc.mean_abs_bias,
                format!("<{}", mc.bias_target)
            );
            let _ = writeln!(
                out,
                "{:<18}{:>9.1}%{:>12}",
                "95% CI Coverage",
                100.0 * mc.ci_coverage,
                format!("{:.0}-{:.0}%", 100.0 * mc.coverage_target.0, 100.0 * mc.coverage_target.1)
            );
            let _ = writeln!(out, "{:<18}{:>10}{:>12}", "Replications", mc.replications, mc.requested);
            let _ = writeln!(
                out,
                "DGP: k={} n={} t={} diag={} offdiag U({}, {}) demeaned={} failures={}",
                mc.dgp.k,
                mc.dgp.n,
                mc.dgp.t,
                mc.dgp.diag,
                mc.dgp.offdiag_low,
                mc.dgp.offdiag_high,
                mc.demeaned,
                mc.failures
            );
            out.push('\n');
        }
        if let Some(p) = &self.permutation {
            let _ = writeln!(out, "Permutation falsification ({} permutations)", p.reps);
            let _ = writeln!(out, "{}", p.summary());
            out.push('\n');
        }
        if !self.robustness.is_empty() {
            let _ = writeln!(out, "Robustness checks");
            let _ = write!(out, "{:<14}{:>12}{:>12}{:>7}", "Model", "AIC", "BIC", "Links");
            for t in &self.tracked {
                let _ = write!(out, "{t:>12}");
            }
            out.push('\n');
            let num = |v: Option<f64>, prec: usize| v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "-".into());
            for row in &self.robustness {
                let _ = write!(
                    out,
                    "{:<14}{:>12}{:>12}{:>7}",
                    row.label,
                    num(row.aic, 1),
                    num(row.bic, 1),
                    row.links.map(|l| l.to_string()).unwrap_or_else(|| "-".into())
                );
                for v in &row.tracked {
                    let _ = write!(out, "{:>12}", num(*v, 2));
                }
                if let Some(reason) = &row.failed {
                    let _ = write!(out, "  failed: {reason}");
                }
                out.push('\n');
            }
            out.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(out, "Note: {n}");
        }
        out
    }
}
