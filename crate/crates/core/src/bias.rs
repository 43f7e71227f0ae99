//! Small-sample bias of the previous-sign strategy against buy-and-hold.
//!
//! With returns `r_0..r_T` i.i.d. symmetric and continuous, the strategy
//! holds `sign(r_{t-1})` over `r_t` for `t = 1..T`. The mean return
//! difference to buy-and-hold is `(1/T) sum_t (s_t - 1) r_t`, which is zero
//! whenever the strategy never goes short. The probability that the strategy
//! does not beat the benchmark (ties counted half) is the p-value one would
//! read off a naive test, and it exceeds 1/2 for short samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{par, rng};

/// Trials per random stream in [`bias_monte_carlo`].
const CHUNK: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasResult {
    /// `P(strategy mean - benchmark mean > 0)`.
    pub p_pos: f64,
    pub p_zero: f64,
    pub p_neg: f64,
}

impl BiasResult {
    /// `p_neg + p_zero / 2`.
    pub fn p_value(&self) -> f64 {
        self.p_neg + 0.5 * self.p_zero
    }
}

/// Exact probabilities for `T = 2` from the eight sign patterns of
/// `(r_0, r_1, r_2)`.
///
/// The difference is `-[r_0 < 0] r_1 - [r_1 < 0] r_2` (times 1/2). When both
/// terms are present with opposite signs the outcome depends on `|r_1|`
/// versus `|r_2|`, which is a fair coin for i.i.d. magnitudes.
pub fn enumerate_bias_t2() -> BiasResult {
    // counts in sixteenths
    let (mut pos, mut zero, mut neg) = (0u32, 0u32, 0u32);
    for pattern in 0..8u32 {
        let up = |k: u32| pattern >> (2 - k) & 1 == 1;
        let term = |prev: usize, cur: usize| -> i32 {
            if up(prev as u32) {
                0
            } else if up(cur as u32) {
                -1
            } else {
                1
            }
        };
        let (a, b) = (term(0, 1), term(1, 2));
        match (a, b) {
            (0, 0) => zero += 2,
            (x, y) if x + y > 0 => pos += 2,
            (x, y) if x + y < 0 => neg += 2,
            _ => {
                pos += 1;
                neg += 1;
            }
        }
    }
    debug_assert_eq!(pos + zero + neg, 16);
    BiasResult {
        p_pos: f64::from(pos) / 16.0,
        p_zero: f64::from(zero) / 16.0,
        p_neg: f64::from(neg) / 16.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub t: usize,
    pub trials: usize,
    pub probabilities: BiasResult,
    pub p_value: f64,
    /// Standard error of `p_value` over trials.
    pub std_error: f64,
}

/// Monte Carlo estimate at sample length `t` with Gaussian returns.
pub fn bias_monte_carlo(t: usize, trials: usize, seed: u64) -> Result<BiasEstimate> {
    if t < 2 {
        return Err(Error::invalid(format!(
            "sample length must be at least 2, got {t}"
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let chunks = trials.div_ceil(CHUNK);
    let counts = par::map_indexed(chunks, |c| {
        let n = CHUNK.min(trials - c * CHUNK);
        let mut g = rng::stream(seed, c as u64);
        let mut r = vec![0.0; t + 1];
        let (mut pos, mut zero, mut neg) = (0u64, 0u64, 0u64);
        for _ in 0..n {
            r.iter_mut().for_each(|x| *x = rng::normal(&mut g));
            let mut short = false;
            let mut diff = 0.0;
            for i in 1..=t {
                if r[i - 1] < 0.0 {
                    short = true;
                    diff -= 2.0 * r[i];
                }
            }
            if !short {
                zero += 1;
            } else if diff > 0.0 {
                pos += 1;
            } else if diff < 0.0 {
                neg += 1;
            } else {
                zero += 1;
            }
        }
        [pos, zero, neg]
    });
    let [pos, zero, neg] = counts.iter().fold([0u64; 3], |acc, c| {
        [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]]
    });
    let n = trials as f64;
    let probabilities = BiasResult {
        p_pos: pos as f64 / n,
        p_zero: zero as f64 / n,
        p_neg: neg as f64 / n,
    };
    let p_value = probabilities.p_value();
    // per-trial outcome is 0, 1/2 or 1
    let second = probabilities.p_neg + 0.25 * probabilities.p_zero;
    let var = (second - p_value * p_value).max(0.0);
    Ok(BiasEstimate {
        t,
        trials,
        probabilities,
        p_value,
        std_error: (var / n).sqrt(),
    })
}

/// Bias p-value for each sample length, one independent seed per length.
pub fn bias_curve(t_values: &[usize], trials: usize, seed: u64) -> Result<Vec<BiasEstimate>> {
    if trials < 10_000 {
        return Err(Error::invalid(format!(
            "need at least 10000 trials, got {trials}"
        )));
    }
    if t_values.is_empty() {
        return Err(Error::invalid("no sample lengths given"));
    }
    t_values
        .iter()
        .map(|&t| bias_monte_carlo(t, trials, rng::derive_seed(seed, t as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_is_exact() {
        let b = enumerate_bias_t2();
        assert_eq!(b.p_pos, 5.0 / 16.0);
        assert_eq!(b.p_zero, 4.0 / 16.0);
        assert_eq!(b.p_neg, 7.0 / 16.0);
        assert_eq!(b.p_pos + b.p_zero + b.p_neg, 1.0);
        assert_eq!(b.p_value(), 0.5625);
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let exact = enumerate_bias_t2();
        let mc = bias_monte_carlo(2, 200_000, 11).unwrap();
        assert!((mc.p_value - exact.p_value()).abs() < 3.0 * mc.std_error);
        assert!((mc.probabilities.p_pos - exact.p_pos).abs() < 0.005);
        assert!((mc.probabilities.p_zero - exact.p_zero).abs() < 0.005);
        assert!((mc.probabilities.p_neg - exact.p_neg).abs() < 0.005);
    }

    #[test]
    fn zero_probability_is_all_long() {
        // ties only when r_0..r_{T-1} are all positive
        for t in [3, 5] {
            let mc = bias_monte_carlo(t, 100_000, 3).unwrap();
            let exact = 0.5f64.powi(t as i32);
            assert!((mc.probabilities.p_zero - exact).abs() < 0.005, "T = {t}");
        }
    }

    #[test]
    fn curve_decays_toward_half() {
        let curve = bias_curve(&[2, 5, 20, 100], 100_000, 5).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].p_value < w[0].p_value + 2.0 * w[0].std_error);
        }
        for e in &curve {
            assert!(e.p_value > 0.5 - 3.0 * e.std_error);
        }
        assert!(curve[0].p_value > curve[3].p_value);
    }

    #[test]
    fn reproducible_and_validated() {
        let a = bias_curve(&[4], 20_000, 9).unwrap();
        let b = bias_curve(&[4], 20_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(bias_curve(&[1], 20_000, 9).is_err());
        assert!(bias_curve(&[2], 100, 9).is_err());
    }
}
