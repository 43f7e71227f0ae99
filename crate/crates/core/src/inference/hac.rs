//! Quadratic-spectral kernel HAC estimation.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bandwidth of the default empirical configuration (daily equity data,
/// about 5000 observations).
pub const DEFAULT_BANDWIDTH: f64 = 2.7;

/// Quadratic-spectral kernel, `k(0) = 1`.
pub fn qs_kernel(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let z = 6.0 * PI * x / 5.0;
    25.0 / (12.0 * PI * PI * x * x) * (z.sin() / z - z.cos())
}

/// Optimal QS bandwidth `1.32 (a T)^(2/5)`.
pub fn auto_bandwidth(a: f64, t: usize) -> Result<f64> {
    if !(a > 0.0) || t == 0 {
        return Err(Error::invalid(
            "bandwidth constant and sample size must be positive",
        ));
    }
    Ok(1.32 * (a * t as f64).powf(0.4))
}

/// The constant `a` for which `auto_bandwidth(a, t)` returns `bandwidth`.
pub fn bandwidth_constant(bandwidth: f64, t: usize) -> f64 {
    (bandwidth / 1.32).powf(2.5) / t as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(f64),
    /// `1.32 (a T)^(2/5)` evaluated at the sample size in use.
    Auto {
        a: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HacConfig {
    pub bandwidth: Bandwidth,
    /// Multiply by `T / (T - 4)`.
    pub small_sample: bool,
}

impl Default for HacConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::Fixed(DEFAULT_BANDWIDTH),
            small_sample: true,
        }
    }
}

impl HacConfig {
    pub fn fixed(bandwidth: f64) -> Self {
        Self {
            bandwidth: Bandwidth::Fixed(bandwidth),
            ..Self::default()
        }
    }

    pub fn bandwidth_for(&self, t: usize) -> Result<f64> {
        let s = match self.bandwidth {
            Bandwidth::Fixed(s) => s,
            Bandwidth::Auto { a } => auto_bandwidth(a, t)?,
        };
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("bandwidth {s} must be positive")));
        }
        Ok(s)
    }

    fn factor(&self, t: usize) -> Result<f64> {
        if !self.small_sample {
            return Ok(1.0);
        }
        if t <= 4 {
            return Err(Error::InsufficientSamples(format!(
                "small-sample factor needs T > 4, got {t}"
            )));
        }
        Ok(t as f64 / (t as f64 - 4.0))
    }
}

/// Kernel-weighted long-run covariance of per-period contributions (rows),
/// `(T/(T-4)) sum_j k(j/S) Gamma(j)` over all lags, with
/// `Gamma(j) = (1/T) sum_t v_t v_{t-j}'` on demeaned rows and
/// `Gamma(-j) = Gamma(j)'`.
pub fn hac_covariance<R: AsRef<[f64]>>(rows: &[R], config: &HacConfig) -> Result<DMatrix<f64>> {
    let t = rows.len();
    if t == 0 {
        return Err(Error::InsufficientSamples("no observations".into()));
    }
    let k = rows[0].as_ref().len();
    let factor = config.factor(t)?;
    let s = config.bandwidth_for(t)?;
    let mut v = DMatrix::<f64>::zeros(t, k);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: row.len(),
            });
        }
        for (c, x) in row.iter().enumerate() {
            v[(i, c)] = *x;
        }
    }
    for mut col in v.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let mut psi = DMatrix::<f64>::zeros(k, k);
    for j in 0..t {
        let w = qs_kernel(j as f64 / s);
        if w == 0.0 {
            continue;
        }
        let mut gamma = DMatrix::<f64>::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let mut acc = 0.0;
                for u in j..t {
                    acc += v[(u, a)] * v[(u - j, b)];
                }
                gamma[(a, b)] = acc / t as f64;
            }
        }
        if j == 0 {
            psi += gamma;
        } else {
            psi += (&gamma + gamma.transpose()) * w;
        }
    }
    Ok(psi * factor)
}

/// Long-run variance of a scalar series, `(T/(T-4)) sum_j k(j/S) gamma(j)`,
/// computed with FFT autocovariances for a fixed sample size. Reusable across
/// threads.
pub struct HacEngine {
    t: usize,
    n_fft: usize,
    factor: f64,
    /// `k(j/S)` for `j = 0..T`, doubled for `j > 0`.
    weights: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl HacEngine {
    pub fn new(t: usize, config: &HacConfig) -> Result<Self> {
        if t == 0 {
            return Err(Error::InsufficientSamples("no observations".into()));
        }
        let factor = config.factor(t)?;
        let s = config.bandwidth_for(t)?;
        let n_fft = (2 * t).next_power_of_two();
        let mut planner = FftPlanner::new();
        let weights = (0..t)
            .map(|j| {
                let w = qs_kernel(j as f64 / s);
                if j == 0 {
                    w
                } else {
                    2.0 * w
                }
            })
            .collect();
        Ok(Self {
            t,
            n_fft,
            factor,
            weights,
            forward: planner.plan_fft_forward(n_fft),
            inverse: planner.plan_fft_inverse(n_fft),
        })
    }

    pub fn len(&self) -> usize {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        self.t == 0
    }

    /// Long-run variance of `z` after demeaning.
    pub fn long_run_variance(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.t {
            return Err(Error::LengthMismatch {
                expected: self.t,
                actual: z.len(),
            });
        }
        let mean = z.iter().sum::<f64>() / self.t as f64;
        let mut buf: Vec<Complex<f64>> = Vec::with_capacity(self.n_fft);
        buf.extend(z.iter().map(|x| Complex::new(x - mean, 0.0)));
        buf.resize(self.n_fft, Complex::new(0.0, 0.0));
        self.forward.process(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex::new(c.norm_sqr(), 0.0);
        }
        self.inverse.process(&mut buf);
        // buf[j] / n_fft = sum_t z_t z_{t+j}
        let scale = 1.0 / (self.n_fft as f64 * self.t as f64);
        let lrv: f64 = self
            .weights
            .iter()
            .zip(&buf)
            .map(|(w, c)| w * c.re * scale)
            .sum();
        Ok(self.factor * lrv)
    }
}
