//! Augmented Dickey-Fuller test with a constant term.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::num::Scalar;
use crate::panel::Panel;
use crate::stats::{median, normal_cdf};

// MacKinnon (1994) response surface, constant-only case, one variable.
const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const SMALL_P: [f64; 3] = [2.1659, 1.4412, 0.038269];
const LARGE_P: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.0010368];

// MacKinnon (2010) finite-sample critical values, constant-only case.
const CRIT: [(f64, [f64; 4]); 3] = [
    (0.01, [-3.43035, -6.5393, -16.786, -79.433]),
    (0.05, [-2.86154, -2.8903, -4.234, -40.040]),
    (0.10, [-2.56677, -1.5384, -2.809, 0.0]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-ratio on the lagged level.
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    pub nobs: usize,
    /// `(level, critical value)` at 1%, 5%, 10%.
    pub critical_values: Vec<(f64, f64)>,
    pub reject: bool,
}

/// Approximate p-value of the ADF statistic.
pub fn mackinnon_p(stat: f64) -> f64 {
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let coefs: &[f64] = if stat <= TAU_STAR { &SMALL_P } else { &LARGE_P };
    let z = coefs.iter().rev().fold(0.0, |acc, c| acc * stat + c);
    normal_cdf(z)
}

fn critical_values(nobs: usize) -> Vec<(f64, f64)> {
    let n = nobs as f64;
    CRIT.iter()
        .map(|(lvl, c)| (*lvl, c[0] + c[1] / n + c[2] / (n * n) + c[3] / (n * n * n)))
        .collect()
}

/// `floor(12 · (n/100)^{1/4})`.
pub fn schwert_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

struct AdfFit {
    stat: f64,
    aic: f64,
    nobs: usize,
}

/// Regresses Δy_t on [1, y_{t−1}, Δy_{t−1..t−lags}] for t ≥ `start`.
fn adf_regression(y: &[f64], lags: usize, start: usize) -> Result<AdfFit> {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    // dy[j] = y[j+1] − y[j]; row j needs dy[j−lags..j]
    let rows: Vec<usize> = (start.max(lags)..dy.len()).collect();
    let ncol = 2 + lags;
    if rows.len() <= ncol {
        return Err(Error::InsufficientData(format!(
            "{} ADF rows for {ncol} regressors",
            rows.len()
        )));
    }
    let x = DMatrix::from_fn(rows.len(), ncol, |r, c| {
        let j = rows[r];
        match c {
            0 => 1.0,
            1 => y[j],
            _ => dy[j - (c - 1)],
        }
    });
    let resp = DMatrix::from_fn(rows.len(), 1, |r, _| dy[rows[r]]);
    let fit = least_squares(&x, &resp, None)?;
    let n = rows.len();
    let ssr = fit.ssr()[0];
    let s2 = ssr / (n - ncol) as f64;
    let se = (s2 * fit.xtx_inverse()[(1, 1)]).sqrt();
    Ok(AdfFit {
        stat: fit.coef[(1, 0)] / se,
        aic: n as f64 * (ssr / n as f64).ln() + 2.0 * ncol as f64,
        nobs: n,
    })
}

/// ADF test with constant. `max_lag = None` uses the Schwert rule and AIC
/// selection over `0..=max_lag` on a common sample.
pub fn adf_test(series: &[f64], max_lag: Option<usize>, alpha: f64) -> Result<AdfResult> {
    let n = series.len();
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("ADF series contains non-finite values".into()));
    }
    let first = series.first().copied().unwrap_or(0.0);
    if series.iter().all(|&v| v == first) {
        return Err(Error::ZeroVariance("ADF series is constant".into()));
    }
    let (cap, autolag) = match max_lag {
        Some(l) => (l, false),
        None => (schwert_max_lag(n).min((n / 2).saturating_sub(2)), true),
    };
    if n <= cap + 3 {
        return Err(Error::InsufficientData(format!(
            "ADF needs more than {} observations, got {n}",
            cap + 3
        )));
    }
    let lags = if autolag {
        let mut best = (f64::INFINITY, 0);
        for l in 0..=cap {
            if let Ok(f) = adf_regression(series, l, cap) {
                if f.aic < best.0 {
                    best = (f.aic, l);
                }
            }
        }
        best.1
    } else {
        cap
    };
    let fit = adf_regression(series, lags, lags)?;
    if !fit.stat.is_finite() {
        return Err(Error::ZeroVariance("ADF regression has zero residual variance".into()));
    }
    let p_value = mackinnon_p(fit.stat);
    Ok(AdfResult {
        statistic: fit.stat,
        p_value,
        lags_used: lags,
        nobs: fit.nobs,
        critical_values: critical_values(fit.nobs),
        reject: p_value < alpha,
    })
}

/// Per-variable summary of ADF tests run on each entity's series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfSummary {
    pub variable: String,
    pub series_tested: usize,
    /// Series skipped (too short or constant).
    pub series_failed: usize,
    pub rejection_fraction: f64,
    pub median_statistic: f64,
    pub median_p_value: f64,
    pub median_lags: f64,
    /// Median p-value below the test level.
    pub reject: bool,
}

fn longest_run<T: Scalar>(s: &[Option<T>]) -> Vec<f64> {
    let mut best: Vec<f64> = Vec::new();
    let mut cur = Vec::new();
    for c in s {
        match c {
            Some(v) => cur.push(v.as_f64()),
            None => {
                if cur.len() > best.len() {
                    best = std::mem::take(&mut cur);
                }
                cur.clear();
            }
        }
    }
    if cur.len() > best.len() {
        best = cur;
    }
    best
}

/// Runs [`adf_test`] on every entity series, summarised per variable.
pub fn adf_by_variable<T: Scalar>(data: &Panel<T>, alpha: f64) -> Vec<AdfSummary> {
    (0..data.n_vars())
        .into_par_iter()
        .map(|v| {
            let results: Vec<Option<AdfResult>> = (0..data.n_entities())
                .map(|i| adf_test(&longest_run(&data.series(i, v)), None, alpha).ok())
                .collect();
            let ok: Vec<&AdfResult> = results.iter().flatten().collect();
            let stats: Vec<f64> = ok.iter().map(|r| r.statistic).collect();
            let ps: Vec<f64> = ok.iter().map(|r| r.p_value).collect();
            let lags: Vec<f64> = ok.iter().map(|r| r.lags_used as f64).collect();
            let median_p = median(&ps);
            AdfSummary {
                variable: data.variables()[v].clone(),
                series_tested: ok.len(),
                series_failed: results.len() - ok.len(),
                rejection_fraction: if ok.is_empty() {
                    0.0
                } else {
                    ok.iter().filter(|r| r.reject).count() as f64 / ok.len() as f64
                },
                median_statistic: median(&stats),
                median_p_value: median_p,
                median_lags: median(&lags),
                reject: median_p < alpha,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = 0.0;
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                y = phi * y + e;
                y
            })
            .collect()
    }

    fn rejection_rate(phi: f64) -> f64 {
        let hits = (0..500u64)
            .filter(|&s| adf_test(&ar1(phi, 200, s), None, 0.05).unwrap().reject)
            .count();
        hits as f64 / 500.0
    }

    #[test]
    fn random_walk_mostly_not_rejected() {
        let r = rejection_rate(1.0);
        assert!(r <= 0.08, "type-I error {r}");
        assert!(1.0 - r >= 0.90);
    }

    #[test]
    fn white_noise_rejected() {
        assert!(rejection_rate(0.0) >= 0.95);
    }

    #[test]
    fn ar_half_rejected() {
        assert!(rejection_rate(0.5) >= 0.90);
    }

    #[test]
    fn p_value_anchors() {
        // the asymptotic 5% critical value maps to p ≈ 0.05
        assert!((mackinnon_p(-2.86154) - 0.05).abs() < 0.003);
        assert!((mackinnon_p(-3.43035) - 0.01).abs() < 0.002);
        assert!(mackinnon_p(-0.5) > 0.5);
        assert_eq!(mackinnon_p(5.0), 1.0);
        assert_eq!(mackinnon_p(-30.0), 0.0);
        // monotone
        let grid: Vec<f64> = (-60..=20).map(|i| mackinnon_p(i as f64 * 0.1)).collect();
        assert!(grid.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn constant_series_errors() {
        assert!(matches!(adf_test(&[3.0; 30], None, 0.05), Err(Error::ZeroVariance(_))));
        assert!(matches!(adf_test(&[1.0, 2.0, 3.0], Some(2), 0.05), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn schwert_rule() {
        assert_eq!(schwert_max_lag(100), 12);
        assert_eq!(schwert_max_lag(24), 8);
    }
}
