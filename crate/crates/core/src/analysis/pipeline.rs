//! The estimation pipeline shared by pooled and per-group runs.

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::panel::Panel;
use crate::pcmci::{run_pcmci_plus, PcmciConfig, PcmciResult};
use crate::preprocess::within_transform;
use crate::pvar::{
    bootstrap_irf, estimate_var, fevd, granger_all, granger_network, impulse_response, resolve_ordering,
    BootstrapConfig, FevdResult, GrangerResult, IrfResult, VarModel,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub p: usize,
    pub alpha: f64,
    pub horizon: usize,
    /// Cholesky ordering by name; panel column order when unset.
    pub ordering: Option<Vec<String>>,
    /// Bands are omitted when unset.
    pub bootstrap: Option<BootstrapConfig>,
    /// PCMCI+ is skipped when unset.
    pub pcmci: Option<PcmciConfig>,
    /// First horizon searched when locating a response peak. The impact
    /// response is set by the ordering, so the default starts at 1.
    pub peak_from: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            p: 2,
            alpha: 0.05,
            horizon: 10,
            ordering: None,
            bootstrap: Some(BootstrapConfig::default()),
            pcmci: None,
            peak_from: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub model: VarModel<f64>,
    pub granger: Vec<GrangerResult>,
    pub network: CausalGraph,
    pub irf: IrfResult<f64>,
    pub fevd: FevdResult<f64>,
    pub pcmci: Option<PcmciResult>,
}

/// Within transformation, VAR(p), Granger tests, orthogonalized IRF with
/// optional bootstrap bands, FEVD and optional PCMCI+ on a differenced panel.
pub fn run_pipeline(diffed: &Panel<f64>, params: &PipelineParams) -> Result<PipelineResult> {
    if params.p == 0 {
        return Err(Error::InvalidParameter("lag order must be at least 1".into()));
    }
    let demeaned = within_transform(diffed);
    let model = estimate_var(&demeaned, params.p)?;
    let granger = granger_all(&model, &demeaned, params.alpha)?;
    let network = granger_network(&model, &demeaned, params.alpha)?;
    let ordering = resolve_ordering(&model.variables, params.ordering.as_deref())?;
    let irf = match &params.bootstrap {
        Some(cfg) => bootstrap_irf(diffed, params.p, params.horizon, &ordering, cfg)?,
        None => impulse_response(&model, params.horizon, &ordering, None)?,
    };
    let fevd = fevd(&model, params.horizon, &ordering, None)?;
    let pcmci = match &params.pcmci {
        Some(cfg) => Some(run_pcmci_plus(&demeaned, cfg)?),
        None => None,
    };
    Ok(PipelineResult {
        model,
        granger,
        network,
        irf,
        fevd,
        pcmci,
    })
}
