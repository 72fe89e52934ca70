//! Panel time-series causal discovery.
//!
//! The pipeline differences and demeans an entity × year × variable panel,
//! fits a pooled fixed-effects VAR, derives Granger networks, orthogonalized
//! impulse responses and variance decompositions, and refines the network
//! with PCMCI+ conditional-independence testing. The [`validation`] module
//! carries the Monte Carlo, permutation and robustness harness.
//!
//! Numerical kernels are generic over [`Scalar`] (`f32`, `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod num;
pub mod panel;
pub mod pcmci;
pub mod preprocess;
pub mod pvar;
pub mod rng;
pub mod stats;
pub mod validation;

pub use error::{Error, ErrorKind, Result};
pub use num::Scalar;
pub use panel::{IncomeGroup, Panel, PanelLayout};

pub type PanelDataset = Panel<f64>;
pub type VarModel64 = pvar::VarModel<f64>;
pub type IrfResult64 = pvar::IrfResult<f64>;
pub type FevdResult64 = pvar::FevdResult<f64>;
pub type LaggedData64 = pcmci::LaggedData<f64>;

pub use graph::{CausalGraph, Edge, EdgeKind};
pub use validation::ValidationReport;
