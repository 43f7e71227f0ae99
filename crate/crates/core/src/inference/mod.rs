//! Studentized Sharpe-ratio differences, block bootstraps and stepdown
//! multiple-testing p-values.
//!
//! The test statistic compares a strategy's Sharpe ratio with the
//! benchmark's, `D = mu1/sigma1 - mu2/sigma2`, studentized with a delta-method
//! standard error whose long-run covariance uses the quadratic-spectral
//! kernel.

mod bootstrap;
mod hac;

pub use bootstrap::{
    block_indices, circular_block_bootstrap, individual_pvalues, pair_pvalue, resample_pvalues,
    select_block_size, signal_bootstrap, significance_report, stepdown_adjust, BlockCalibration,
    BlockSizeChoice, BootstrapConfig, BootstrapMode, PValueSide, SignificanceReport,
};
pub use hac::{
    auto_bandwidth, bandwidth_constant, hac_covariance, qs_kernel, Bandwidth, HacConfig, HacEngine,
    DEFAULT_BANDWIDTH,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Means and population standard deviations of strategy (1) and benchmark (2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl MomentVector {
    pub fn estimate(r1: &[f64], r2: &[f64]) -> Result<Self> {
        check_pair(r1, r2)?;
        let (mu1, sigma1) = crate::series::mean_std(r1);
        let (mu2, sigma2) = crate::series::mean_std(r2);
        if !(sigma1 > 0.0) {
            return Err(Error::ZeroVariance("strategy returns"));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::ZeroVariance("benchmark returns"));
        }
        Ok(Self {
            mu1,
            mu2,
            sigma1,
            sigma2,
        })
    }

    pub fn sharpe_diff(&self) -> f64 {
        self.mu1 / self.sigma1 - self.mu2 / self.sigma2
    }

    /// Gradient of the Sharpe difference with respect to
    /// `(mu1, mu2, var1, var2)`.
    pub fn gradient(&self) -> [f64; 4] {
        [
            1.0 / self.sigma1,
            -1.0 / self.sigma2,
            -self.mu1 / (2.0 * self.sigma1.powi(3)),
            self.mu2 / (2.0 * self.sigma2.powi(3)),
        ]
    }
}

/// Sharpe difference as a function of `(mu1, mu2, var1, var2)`.
pub fn sharpe_diff_from_moments(nu: [f64; 4]) -> f64 {
    nu[0] / nu[2].sqrt() - nu[1] / nu[3].sqrt()
}

fn check_pair(r1: &[f64], r2: &[f64]) -> Result<()> {
    if r1.len() != r2.len() {
        return Err(Error::LengthMismatch {
            expected: r1.len(),
            actual: r2.len(),
        });
    }
    if r1.len() < 2 {
        return Err(Error::InsufficientSamples(
            "need at least two periods".into(),
        ));
    }
    Ok(())
}

/// `mu1/sigma1 - mu2/sigma2` of per-period (not annualised) returns.
pub fn sharpe_diff(strategy: &[f64], benchmark: &[f64]) -> Result<f64> {
    Ok(MomentVector::estimate(strategy, benchmark)?.sharpe_diff())
}

/// Per-period moment contributions `(r1, r2, (r1-mu1)^2, (r2-mu2)^2)`.
pub fn moment_contributions(r1: &[f64], r2: &[f64]) -> Result<Vec<[f64; 4]>> {
    check_pair(r1, r2)?;
    let (mu1, _) = crate::series::mean_std(r1);
    let (mu2, _) = crate::series::mean_std(r2);
    Ok(r1
        .iter()
        .zip(r2)
        .map(|(a, b)| [*a, *b, (a - mu1).powi(2), (b - mu2).powi(2)])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Studentized {
    /// Sharpe difference `D`.
    pub diff: f64,
    /// Standard error `s(D)`.
    pub std_error: f64,
    /// `D / s(D)`.
    pub stat: f64,
}

/// `D / s(D)` with `s(D) = sqrt(grad' Psi grad / T)`, `Psi` the QS-HAC
/// covariance of the moment contributions.
pub fn studentized_sharpe_diff(
    strategy: &[f64],
    benchmark: &[f64],
    hac: &HacConfig,
) -> Result<Studentized> {
    let engine = HacEngine::new(strategy.len(), hac)?;
    studentize(&engine, strategy, benchmark)
}

/// Studentization with a prepared engine; the projected contribution
/// `grad' v_t` is a scalar series, so `grad' Psi grad` is its long-run
/// variance.
pub fn studentize(engine: &HacEngine, r1: &[f64], r2: &[f64]) -> Result<Studentized> {
    let m = MomentVector::estimate(r1, r2)?;
    let diff = m.sharpe_diff();
    let g = m.gradient();
    let (v1, v2) = (m.sigma1 * m.sigma1, m.sigma2 * m.sigma2);
    let z: Vec<f64> = r1
        .iter()
        .zip(r2)
        .map(|(a, b)| {
            let (d1, d2) = (a - m.mu1, b - m.mu2);
            g[0] * d1 + g[1] * d2 + g[2] * (d1 * d1 - v1) + g[3] * (d2 * d2 - v2)
        })
        .collect();
    let qf = engine.long_run_variance(&z)?;
    let t = r1.len() as f64;
    // size of z if its terms did not cancel
    let reference = (g[0] * m.sigma1).powi(2)
        + (g[1] * m.sigma2).powi(2)
        + (g[2] * v1).powi(2)
        + (g[3] * v2).powi(2);
    let mean_sq = z.iter().map(|x| x * x).sum::<f64>() / t;
    if mean_sq <= 1e-20 * reference {
        // contributions cancel exactly, e.g. a positively scaled benchmark
        let sharpe_scale = (m.mu1 / m.sigma1).abs() + (m.mu2 / m.sigma2).abs();
        if diff.abs() <= 1e-12 * sharpe_scale.max(f64::MIN_POSITIVE) {
            return Ok(Studentized {
                diff: 0.0,
                std_error: 0.0,
                stat: 0.0,
            });
        }
    }
    if !(qf > 0.0) {
        return Err(Error::Numeric(format!(
            "non-positive quadratic form {qf:e} (D = {diff}, mean z^2 = {mean_sq:e})"
        )));
    }
    let se = (qf / t).sqrt();
    Ok(Studentized {
        diff,
        std_error: se,
        stat: diff / se,
    })
}
