//! Synthetic VAR(1..p) panels with known coefficients.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lower_cholesky, spectral_radius};
use crate::panel::Panel;
use crate::rng::stream_rng;

pub const BURN_IN: usize = 50;

/// A data-generating VAR with optional entity intercept heterogeneity.
#[derive(Debug, Clone)]
pub struct VarDgp {
    pub coeffs: Vec<DMatrix<f64>>,
    pub noise_cov: DMatrix<f64>,
    pub names: Vec<String>,
    /// Standard deviation of per-entity, per-variable intercepts.
    pub fixed_effect_sd: f64,
    pub burn_in: usize,
}

impl VarDgp {
    pub fn new(coeffs: Vec<DMatrix<f64>>, noise_cov: DMatrix<f64>) -> Self {
        let k = noise_cov.nrows();
        VarDgp {
            coeffs,
            noise_cov,
            names: (1..=k).map(|i| format!("x{i}")).collect(),
            fixed_effect_sd: 0.0,
            burn_in: BURN_IN,
        }
    }

    pub fn with_names(mut self, names: &[&str]) -> Self {
        self.names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_fixed_effects(mut self, sd: f64) -> Self {
        self.fixed_effect_sd = sd;
        self
    }

    pub fn k(&self) -> usize {
        self.noise_cov.nrows()
    }
}

/// Simulates `n` independent entity paths of length `t` after burn-in.
///
/// Entity `i` uses generator stream `i` of `seed`.
pub fn simulate_var_panel(dgp: &VarDgp, n: usize, t: usize, seed: u64) -> Result<Panel<f64>> {
    let k = dgp.k();
    let p = dgp.coeffs.len();
    if dgp.names.len() != k || dgp.coeffs.iter().any(|c| c.shape() != (k, k)) {
        return Err(Error::InvalidParameter("DGP dimensions disagree".into()));
    }
    let chol = lower_cholesky(&dgp.noise_cov).ok_or(Error::NotPositiveDefinite)?;
    let mut cells = Vec::with_capacity(n * t * k);
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        let mu = DVector::from_fn(k, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * dgp.fixed_effect_sd
        });
        let mut hist: Vec<DVector<f64>> = vec![DVector::zeros(k); p];
        for step in 0..dgp.burn_in + t {
            let z = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            let mut y = &mu + &chol * z;
            for (l, c) in dgp.coeffs.iter().enumerate() {
                y += c * &hist[hist.len() - 1 - l];
            }
            if step >= dgp.burn_in {
                cells.extend(y.iter().map(|v| Some(*v)));
            }
            hist.push(y);
            if hist.len() > p {
                hist.remove(0);
            }
        }
    }
    Panel::new(
        (0..n).map(|i| format!("e{i:04}")).collect(),
        (0..t as i32).map(|y| 2000 + y).collect(),
        dgp.names.clone(),
        cells,
    )
}

/// Random VAR(1) specification: fixed diagonal persistence, uniform
/// off-diagonal coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub k: usize,
    pub n: usize,
    pub t: usize,
    pub diag: f64,
    pub offdiag_low: f64,
    pub offdiag_high: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for DgpSpec {
    fn default() -> Self {
        DgpSpec {
            k: 8,
            n: 168,
            t: 25,
            diag: 0.5,
            offdiag_low: -0.3,
            offdiag_high: 0.3,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

/// Drawn coefficients and how stability was reached.
#[derive(Debug, Clone)]
pub struct DrawnCoefficients {
    pub phi: DMatrix<f64>,
    pub draws: usize,
    pub rescaled: bool,
    pub spectral_radius: f64,
}

const MAX_REDRAWS: usize = 100;
const RESCALE_TARGET: f64 = 0.95;

/// Draws Φ until its spectral radius is below one; after 100 unstable
/// draws the last one is scaled to radius 0.95.
pub fn draw_coefficients(spec: &DgpSpec) -> Result<DrawnCoefficients> {
    if spec.k == 0 || spec.offdiag_low > spec.offdiag_high {
        return Err(Error::InvalidParameter("invalid DGP specification".into()));
    }
    let mut rng = stream_rng(spec.seed, u64::MAX);
    let uni = Uniform::new_inclusive(spec.offdiag_low, spec.offdiag_high)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut phi = DMatrix::zeros(spec.k, spec.k);
    for draws in 1..=MAX_REDRAWS {
        phi = DMatrix::from_fn(spec.k, spec.k, |r, c| if r == c { spec.diag } else { uni.sample(&mut rng) });
        let rho = spectral_radius(&phi);
        if rho < 1.0 {
            return Ok(DrawnCoefficients {
                phi,
                draws,
                rescaled: false,
                spectral_radius: rho,
            });
        }
    }
    let rho = spectral_radius(&phi);
    if !rho.is_finite() || rho == 0.0 {
        return Err(Error::Unstable(format!("spectral radius {rho}")));
    }
    phi *= RESCALE_TARGET / rho;
    Ok(DrawnCoefficients {
        spectral_radius: spectral_radius(&phi),
        phi,
        draws: MAX_REDRAWS,
        rescaled: true,
    })
}

/// A simulated panel with its true coefficient matrix.
#[derive(Debug, Clone)]
pub struct SimulatedPanel {
    pub panel: Panel<f64>,
    pub truth: DrawnCoefficients,
}

pub fn simulate_dgp(spec: &DgpSpec) -> Result<SimulatedPanel> {
    let truth = draw_coefficients(spec)?;
    let cov = DMatrix::from_diagonal_element(spec.k, spec.k, spec.noise_sd * spec.noise_sd);
    let dgp = VarDgp::new(vec![truth.phi.clone()], cov);
    let panel = simulate_var_panel(&dgp, spec.n, spec.t, spec.seed)?;
    Ok(SimulatedPanel { panel, truth })
}

/// Uniform entity permutation helper (Fisher-Yates).
pub(crate) fn shuffled<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
    v
}
