//! Nested-regression F tests for Granger non-causality.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{StackedDesign, VarModel};
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, Edge, EdgeKind, Provenance};
use crate::linalg::least_squares;
use crate::num::Scalar;
use crate::panel::Panel;
use crate::stats::f_sf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub source: String,
    pub target: String,
    pub f_stat: f64,
    pub p_value: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub significant: bool,
}

fn design_for<T: Scalar>(model: &VarModel<T>, data: &Panel<T>) -> Result<StackedDesign<T>> {
    if data.variables() != model.variables.as_slice() {
        return Err(Error::InvalidParameter("model and data variables differ".into()));
    }
    let design = StackedDesign::build(data, model.p, model.sample_start)?;
    if design.nobs() != model.nobs {
        return Err(Error::InvalidParameter(format!(
            "model was fitted on {} observations, data yields {}",
            model.nobs,
            design.nobs()
        )));
    }
    Ok(design)
}

fn test_on_design<T: Scalar>(
    design: &StackedDesign<T>,
    ssr_u: &[T],
    variables: &[String],
    source: usize,
    target: usize,
    alpha: f64,
) -> Result<GrangerResult> {
    if source == target {
        return Err(Error::InvalidParameter("Granger source and target must differ".into()));
    }
    let p = design.p;
    let drop: Vec<usize> = (1..=p).map(|l| design.column(source, l)).collect();
    let keep: Vec<usize> = (0..design.x.ncols()).filter(|c| !drop.contains(c)).collect();
    let xr = design.x.select_columns(&keep);
    let names: Vec<String> = keep.iter().map(|&c| design.column_names[c].clone()).collect();
    let yr = DMatrix::from_fn(design.nobs(), 1, |r, _| design.y[(r, target)]);
    let restricted = least_squares(&xr, &yr, Some(&names))?;
    let ssr_r = restricted.ssr()[0].as_f64();
    let ssr_u = ssr_u[target].as_f64();
    let df_den = design.nobs() - design.x.ncols();
    let f = (((ssr_r - ssr_u) / p as f64) / (ssr_u / df_den as f64)).max(0.0);
    let p_value = f_sf(f, p as f64, df_den as f64);
    Ok(GrangerResult {
        source: variables[source].clone(),
        target: variables[target].clone(),
        f_stat: f,
        p_value,
        df_num: p,
        df_den,
        significant: p_value < alpha,
    })
}

/// Tests whether all `p` lags of `source` can be excluded from the
/// `target` equation of `model`.
pub fn granger_test<T: Scalar>(
    model: &VarModel<T>,
    data: &Panel<T>,
    source: &str,
    target: &str,
    alpha: f64,
) -> Result<GrangerResult> {
    let design = design_for(model, data)?;
    let (s, t) = (model.variable_index(source)?, model.variable_index(target)?);
    test_on_design(&design, &model.ssr, &model.variables, s, t, alpha)
}

/// All `k(k − 1)` ordered pairs, source-major.
pub fn granger_all<T: Scalar>(model: &VarModel<T>, data: &Panel<T>, alpha: f64) -> Result<Vec<GrangerResult>> {
    let design = design_for(model, data)?;
    let k = model.k;
    let mut out = Vec::with_capacity(k * (k - 1));
    for s in 0..k {
        for t in 0..k {
            if s != t {
                out.push(test_on_design(&design, &model.ssr, &model.variables, s, t, alpha)?);
            }
        }
    }
    Ok(out)
}

/// One directed edge per significant ordered pair. The edge carries the
/// lag whose coefficient has the largest magnitude.
pub fn granger_network<T: Scalar>(model: &VarModel<T>, data: &Panel<T>, alpha: f64) -> Result<CausalGraph> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1)")));
    }
    let tests = granger_all(model, data, alpha)?;
    let mut g = CausalGraph::new(model.variables.clone());
    for r in tests.iter().filter(|r| r.significant) {
        let (s, t) = (model.variable_index(&r.source)?, model.variable_index(&r.target)?);
        let (lag, coef) = (1..=model.p)
            .map(|l| (l, model.coefficient(l, t, s).as_f64()))
            .fold((1, 0.0f64), |best, c| if c.1.abs() > best.1.abs() { c } else { best });
        g.add_edge(Edge {
            source: r.source.clone(),
            target: r.target.clone(),
            lag,
            strength: coef,
            p_value: r.p_value,
            kind: EdgeKind::Lagged,
            provenance: Provenance::Granger,
        })?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::within_transform;
    use crate::pvar::estimate_var;
    use crate::validation::{simulate_var_panel, VarDgp};

    fn linked(seed: u64) -> Panel<f64> {
        // x exogenous AR(1), y_t = 0.5 x_{t-1} + e
        let phi = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.5, 0.0]);
        let dgp = VarDgp::new(vec![phi], DMatrix::identity(2, 2)).with_names(&["x", "y"]);
        within_transform(&simulate_var_panel(&dgp, 100, 25, seed).unwrap())
    }

    #[test]
    fn planted_link_detected() {
        let hits = (0..100)
            .filter(|&s| {
                let d = linked(s);
                let m = estimate_var(&d, 1).unwrap();
                granger_test(&m, &d, "x", "y", 0.05).unwrap().significant
            })
            .count();
        assert!(hits >= 95, "power {hits}/100");
    }

    #[test]
    fn result_fields_consistent() {
        let d = linked(3);
        let m = estimate_var(&d, 2).unwrap();
        let r = granger_test(&m, &d, "y", "x", 0.05).unwrap();
        assert_eq!(r.df_num, 2);
        assert_eq!(r.df_den, m.nobs - 5);
        assert!(r.f_stat >= 0.0 && (0.0..=1.0).contains(&r.p_value));
        assert!(granger_test(&m, &d, "x", "x", 0.05).is_err());
    }

    #[test]
    fn zero_alpha_gives_empty_graph() {
        let d = linked(4);
        let m = estimate_var(&d, 1).unwrap();
        let g = granger_network(&m, &d, 0.0).unwrap();
        assert!(g.edges.is_empty());
        let g = granger_network(&m, &d, 0.05).unwrap();
        assert!(g.has_edge("x", "y", 1));
    }

    #[test]
    fn pair_count_for_eight_variables() {
        let dgp = VarDgp::new(vec![DMatrix::from_diagonal_element(8, 8, 0.2)], DMatrix::identity(8, 8));
        let d = within_transform(&simulate_var_panel(&dgp, 20, 25, 9).unwrap());
        let m = estimate_var(&d, 1).unwrap();
        assert_eq!(granger_all(&m, &d, 0.05).unwrap().len(), 56);
    }
}
