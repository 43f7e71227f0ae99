//! Data-generating processes and the Markov-chain algebra behind them.
//!
//! Two return processes are provided: the Gaussian AR(p) process and the
//! binary Markov process M(p), whose sign follows a p-th order Markov chain
//! while magnitudes are half-normal. Sign states are indexed by reading the
//! sign tuple (oldest first) as a binary number with `+` as 1, so the most
//! recent sign sits in the least-significant bit.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::series::{sign, sign_state, ReturnSeries, SignTransitionTable};

/// Largest lag accepted for binary Markov specs (2^12 states).
pub const MAX_MARKOV_LAG: usize = 12;

/// Burn-in multiplier for AR simulation: `10 * lag` samples are discarded.
const AR_BURN_IN_PER_LAG: usize = 10;

/// Monte Carlo work is split into chunks of this many samples, each on its
/// own RNG stream.
const MC_CHUNK: usize = 100_000;

/// `X_t = phi0 + sum_i phi_i X_{t-i} + a_t`, `a_t ~ N(0, sigma^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArSpec {
    pub phi0: f64,
    pub phi: Vec<f64>,
    pub sigma: f64,
}

impl ArSpec {
    pub fn new(phi0: f64, phi: Vec<f64>, sigma: f64) -> Result<Self> {
        let spec = Self { phi0, phi, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn white_noise(sigma: f64) -> Self {
        Self {
            phi0: 0.0,
            phi: vec![0.0],
            sigma,
        }
    }

    pub fn lag(&self) -> usize {
        self.phi.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi.is_empty() {
            return Err(Error::invalid("AR spec needs at least one lag"));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid("AR innovation sigma must be positive"));
        }
        if !self.phi0.is_finite() || self.phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("AR coefficients must be finite"));
        }
        Ok(())
    }

    /// Whether all roots of the characteristic polynomial lie outside the
    /// unit circle (equivalently, the companion matrix is a contraction).
    pub fn is_stationary(&self) -> bool {
        let p = self.lag();
        let mut companion = DMatrix::<f64>::zeros(p, p);
        for (j, &c) in self.phi.iter().enumerate() {
            companion[(0, j)] = c;
        }
        for i in 1..p {
            companion[(i, i - 1)] = 1.0;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .all(|z| z.norm() < 1.0)
    }
}

/// Simulate `length` observations of an AR process.
///
/// The first `lag` values are drawn from `N(0, sigma^2)` and a further
/// `10 * lag` values are discarded as burn-in.
pub fn simulate_ar(spec: &ArSpec, length: usize, seed: u64) -> Result<ReturnSeries> {
    spec.validate()?;
    if length == 0 {
        return Err(Error::invalid("simulation length must be positive"));
    }
    let mut g = rng::stream(seed, 0);
    let values = ar_path(spec, length, &mut g);
    ReturnSeries::undated(values)
}

pub(crate) fn ar_path(spec: &ArSpec, length: usize, g: &mut rng::Rng) -> Vec<f64> {
    let p = spec.lag();
    let burn = AR_BURN_IN_PER_LAG * p;
    let total = p + burn + length;
    let mut x = Vec::with_capacity(total);
    for _ in 0..p {
        x.push(spec.sigma * rng::normal(g));
    }
    for t in p..total {
        let mut v = spec.phi0 + spec.sigma * rng::normal(g);
        for (i, c) in spec.phi.iter().enumerate() {
            v += c * x[t - 1 - i];
        }
        x.push(v);
    }
    x.split_off(p + burn)
}

/// Outgoing probabilities of a binary Markov chain, one `delta_p` per state:
/// `P(up) = (1 + dp) / 2`, `P(down) = (1 - dp) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub lag: usize,
    pub delta_p: Vec<f64>,
    pub sigma: f64,
}

impl TransitionSpec {
    pub fn new(lag: usize, delta_p: Vec<f64>, sigma: f64) -> Result<Self> {
        let spec = Self {
            lag,
            delta_p,
            sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Memoryless chain: every state has the same `delta_p`.
    pub fn constant(lag: usize, dp: f64, sigma: f64) -> Result<Self> {
        Self::new(lag, vec![dp; 1 << lag], sigma)
    }

    /// Two-lag chain with uniform stationary distribution, parameterised by
    /// the gaps of the states `(+,-)` and `(+,+)`; the states with the oldest
    /// sign flipped take the opposite gap. `(0.5, -0.5)` is XOR-like.
    pub fn uniform_two_lag(dp_plus_minus: f64, dp_plus_plus: f64, sigma: f64) -> Result<Self> {
        // index: 0 = (-,-), 1 = (-,+), 2 = (+,-), 3 = (+,+)
        Self::new(
            2,
            vec![-dp_plus_minus, -dp_plus_plus, dp_plus_minus, dp_plus_plus],
            sigma,
        )
    }

    /// Two-lag uniform chain oriented so that `d1 == d2` gives identical gaps
    /// on reversed states, i.e. a sign pattern with no linear signature.
    /// `(d, d)` is an XOR pattern of strength `d`.
    pub fn sign_pattern_two_lag(d1: f64, d2: f64, sigma: f64) -> Result<Self> {
        Self::uniform_two_lag(d1, -d2, sigma)
    }

    pub fn states(&self) -> usize {
        1 << self.lag
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 || self.lag > MAX_MARKOV_LAG {
            return Err(Error::invalid(format!(
                "Markov lag must be in 1..={MAX_MARKOV_LAG}"
            )));
        }
        if self.delta_p.len() != 1 << self.lag {
            return Err(Error::LengthMismatch {
                expected: 1 << self.lag,
                actual: self.delta_p.len(),
            });
        }
        if let Some(i) = self.delta_p.iter().position(|d| !(-1.0..=1.0).contains(d)) {
            return Err(Error::invalid(format!(
                "delta_p[{i}] = {} outside [-1, 1]",
                self.delta_p[i]
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid("sigma must be positive"));
        }
        Ok(())
    }

    pub fn p_up(&self, state: usize) -> f64 {
        0.5 * (1.0 + self.delta_p[state])
    }

    pub fn p_down(&self, state: usize) -> f64 {
        0.5 * (1.0 - self.delta_p[state])
    }

    /// Successor state after a move of the given sign.
    pub fn next_state(&self, state: usize, up: bool) -> usize {
        ((state << 1) | usize::from(up)) & (self.states() - 1)
    }
}

/// Simulate the binary Markov process: the next return is `+|N(0, sigma)|`
/// with the current state's up-probability and `-|N(0, sigma)|` otherwise.
/// The initial state is uniform over all states.
pub fn simulate_markov(spec: &TransitionSpec, length: usize, seed: u64) -> Result<ReturnSeries> {
    spec.validate()?;
    if length == 0 {
        return Err(Error::invalid("simulation length must be positive"));
    }
    let mut g = rng::stream(seed, 0);
    ReturnSeries::undated(markov_path(spec, length, &mut g))
}

pub(crate) fn markov_path(spec: &TransitionSpec, length: usize, g: &mut rng::Rng) -> Vec<f64> {
    let mut state = g.random_range(0..spec.states());
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let up = g.random::<f64>() < spec.p_up(state);
        let magnitude = (spec.sigma * rng::normal(g)).abs();
        out.push(if up { magnitude } else { -magnitude });
        state = spec.next_state(state, up);
    }
    out
}

/// Column-stochastic transition matrix, `P[(i, j)] = P(S_j -> S_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(pub DMatrix<f64>);

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.0.column_iter().map(|c| c.sum()).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }
}

pub fn build_transition_matrix(spec: &TransitionSpec) -> Result<TransitionMatrix> {
    spec.validate()?;
    let n = spec.states();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        p[(spec.next_state(j, true), j)] += spec.p_up(j);
        p[(spec.next_state(j, false), j)] += spec.p_down(j);
    }
    Ok(TransitionMatrix(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    /// More than one closed class: several unit eigenvalues, and `pi` is the
    /// limit reached from the uniform start rather than a unique solution.
    pub reducible: bool,
}

const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_ITER: usize = 1_000_000;

/// Stationary distribution by power iteration on the lazy chain `(P + I)/2`
/// started from the uniform vector. The lazy chain shares the stationary
/// vectors of `P` and is aperiodic, so periodic chains converge as well.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    let n = p.dim();
    if n == 0 || p.0.ncols() != n {
        return Err(Error::invalid(
            "transition matrix must be square and non-empty",
        ));
    }
    if let Some(j) = p.column_sums().iter().position(|s| (s - 1.0).abs() > 1e-9) {
        return Err(Error::invalid(format!("column {j} does not sum to one")));
    }
    let mut pi = DVector::from_element(n, 1.0 / n as f64);
    let mut converged = false;
    for _ in 0..STATIONARY_MAX_ITER {
        let next = (&p.0 * &pi + &pi) * 0.5;
        let delta = (&next - &pi).abs().sum();
        pi = next;
        if delta < STATIONARY_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "power iteration did not converge in {STATIONARY_MAX_ITER} iterations"
        )));
    }
    let total = pi.sum();
    pi /= total;
    Ok(StationaryDistribution {
        pi: pi.iter().copied().collect(),
        reducible: closed_classes(p) > 1,
    })
}

/// Number of closed communicating classes of the chain's transition graph.
fn closed_classes(p: &TransitionMatrix) -> usize {
    let n = p.dim();
    // successors of j: states i with P(j -> i) > 0
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| p.0[(i, j)] > 0.0).collect())
        .collect();
    let reach = |start: usize| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    };
    let reachable: Vec<Vec<bool>> = (0..n).map(reach).collect();
    let mut class_of = vec![usize::MAX; n];
    let mut closed = 0;
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n)
            .filter(|&j| reachable[i][j] && reachable[j][i])
            .collect();
        for &m in &members {
            class_of[m] = i;
        }
        let is_closed = (0..n).all(|j| !reachable[i][j] || reachable[j][i]);
        if is_closed {
            closed += 1;
        }
    }
    closed
}

/// `sum_i pi_i * dp_i`: zero when up and down moves balance at stationarity.
pub fn balancing_residual(spec: &TransitionSpec) -> Result<f64> {
    let stationary = stationary_distribution(&build_transition_matrix(spec)?)?;
    Ok(stationary
        .pi
        .iter()
        .zip(&spec.delta_p)
        .map(|(p, d)| p * d)
        .sum())
}

/// `+1/-1` entry of a state for the sign at lag `k` (1 = most recent).
#[inline]
fn state_sign(state: usize, k: usize) -> f64 {
    if state >> (k - 1) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Mean half-normal magnitude over its root-mean-square: `alpha / sigma`.
fn half_normal_ratio() -> f64 {
    (2.0 / PI).sqrt()
}

/// Probability limit of the OLS AR(p) coefficients `(phi_1, .., phi_p)` fitted
/// (with intercept) to the binary Markov process, `phi_k` multiplying
/// `X_{t-k}`. Uses the exact stationary law of `p + 1` consecutive signs.
pub fn population_ols_limit(spec: &TransitionSpec) -> Result<Vec<f64>> {
    let stationary = stationary_distribution(&build_transition_matrix(spec)?)?;
    let pi = &stationary.pi;
    let lag = spec.lag;
    let n = spec.states();
    let a2 = half_normal_ratio().powi(2); // alpha^2 / sigma^2

    // E[s] at stationarity, read from the most recent sign of the state
    let mean_sign: f64 = (0..n).map(|i| pi[i] * state_sign(i, 1)).sum();

    // E[s_{t-j} s_{t-k}] for j, k in 1..=lag and E[s_{t-k} s_t]
    let mut cross_in = DMatrix::<f64>::zeros(lag, lag);
    let mut cross_out = DVector::<f64>::zeros(lag);
    for i in 0..n {
        for j in 1..=lag {
            for k in 1..=lag {
                cross_in[(j - 1, k - 1)] += pi[i] * state_sign(i, j) * state_sign(i, k);
            }
            cross_out[j - 1] += pi[i] * state_sign(i, j) * spec.delta_p[i];
        }
    }
    // covariances in units of sigma^2
    let mut cov_in = DMatrix::<f64>::zeros(lag, lag);
    for j in 0..lag {
        for k in 0..lag {
            cov_in[(j, k)] = if j == k {
                1.0 - a2 * mean_sign * mean_sign
            } else {
                a2 * (cross_in[(j, k)] - mean_sign * mean_sign)
            };
        }
    }
    let cov_out = cross_out.map(|c| a2 * (c - mean_sign * mean_sign));
    let phi = cov_in.lu().solve(&cov_out).ok_or(Error::Singular {
        rows: lag,
        cols: lag,
    })?;
    Ok(phi.iter().copied().collect())
}

/// Closed form of the OLS limit when all states are equally likely: lagged
/// signs are then independent and fair, and pairing each state with its
/// reverse gives `(2/pi) / 2^p * sum_pairs S+ (dp+ - dp-)`.
pub fn expected_ar_estimator_uniform(spec: &TransitionSpec) -> Vec<f64> {
    let n = spec.states();
    let mask = n - 1;
    let scale = half_normal_ratio().powi(2) / n as f64;
    (1..=spec.lag)
        .map(|k| {
            // S+ = states whose oldest sign is +
            (n / 2..n)
                .map(|i| state_sign(i, k) * (spec.delta_p[i] - spec.delta_p[i ^ mask]))
                .sum::<f64>()
                * scale
        })
        .collect()
}

/// Expected OLS AR coefficients for a binary Markov process. Uses the closed
/// pairing form when the stationary law is uniform and the exact population
/// limit otherwise. Identically zero when reversed states share their gap.
pub fn expected_ar_estimator(spec: &TransitionSpec) -> Result<Vec<f64>> {
    let stationary = stationary_distribution(&build_transition_matrix(spec)?)?;
    let uniform = 1.0 / spec.states() as f64;
    if stationary.pi.iter().all(|p| (p - uniform).abs() < 1e-10) {
        Ok(expected_ar_estimator_uniform(spec))
    } else {
        population_ols_limit(spec)
    }
}

/// `P(X_{t+1} >= 0 | X_t >= 0)` for an AR(1) with coefficient `phi`.
pub fn ar1_directional_accuracy(phi: f64) -> Result<f64> {
    if !(phi.abs() < 1.0) {
        return Err(Error::Domain(format!("|phi| = {} must be < 1", phi.abs())));
    }
    Ok(0.5 + (phi / (1.0 - phi * phi)).atan() / PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalBias {
    pub probability: f64,
    pub std_error: f64,
    pub visits: u64,
}

/// Monte Carlo estimate of `P(X_{t+1} >= 0 | sign state of the last p returns
/// = region)` under an AR process, `p` being the process lag.
pub fn directional_bias_mc(
    spec: &ArSpec,
    region: usize,
    samples: usize,
    seed: u64,
) -> Result<DirectionalBias> {
    spec.validate()?;
    let lag = spec.lag();
    if region >= 1 << lag {
        return Err(Error::invalid(format!(
            "region {region} out of range for lag {lag}"
        )));
    }
    if samples < 10_000 {
        return Err(Error::invalid(
            "directional bias needs at least 10^4 samples",
        ));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let counts = par::map_indexed(chunks, |c| {
        let len = MC_CHUNK.min(samples - c * MC_CHUNK);
        let mut g = rng::stream(seed, c as u64);
        let x = ar_path(spec, len + lag, &mut g);
        let mut visits = 0u64;
        let mut ups = 0u64;
        for t in lag..x.len() {
            if sign_state(&x[t - lag..t]) == region {
                visits += 1;
                ups += u64::from(sign(x[t]) > 0);
            }
        }
        (visits, ups)
    });
    let (visits, ups) = counts
        .iter()
        .fold((0, 0), |(v, u), &(cv, cu)| (v + cv, u + cu));
    if visits == 0 {
        return Err(Error::InsufficientSamples(format!(
            "region {region} never visited in {samples} draws"
        )));
    }
    let p = ups as f64 / visits as f64;
    Ok(DirectionalBias {
        probability: p,
        std_error: (p * (1.0 - p) / visits as f64).sqrt(),
        visits,
    })
}

/// Transition spec implied by an empirical sign-transition table.
pub fn spec_from_transitions(table: &SignTransitionTable) -> Result<TransitionSpec> {
    let delta_p = (0..table.visits.len())
        .map(|i| {
            table
                .prob_up(i)
                .map(|p| 2.0 * p - 1.0)
                .ok_or(Error::IncompleteTable { state: i })
        })
        .collect::<Result<Vec<_>>>()?;
    TransitionSpec::new(table.lag, delta_p, 1.0)
}

/// Expected AR coefficients implied by a sign-transition table, expressed as
/// excess directional accuracy (`P(correct) - 1/2`) an AR(1) forecaster with
/// that coefficient would achieve, so they compare directly with the
/// table's transition probabilities.
pub fn expected_scaled_ar_from_transitions(table: &SignTransitionTable) -> Result<Vec<f64>> {
    let spec = spec_from_transitions(table)?;
    population_ols_limit(&spec)?
        .into_iter()
        .map(|phi| ar1_directional_accuracy(phi).map(|p| p - 0.5))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lag1_autocorr(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>();
        let c = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>();
        c / v
    }

    #[test]
    fn white_noise_moments() {
        let x = simulate_ar(&ArSpec::white_noise(1.0), 1_000_000, 1).unwrap();
        let (m, s) = crate::series::mean_std(x.values());
        assert_abs_diff_eq!(m, 0.0, epsilon = 0.01);
        assert_abs_diff_eq!(s * s, 1.0, epsilon = 0.01);
    }

    #[test]
    fn ar1_autocorrelation() {
        let spec = ArSpec::new(0.0, vec![0.5], 1.0).unwrap();
        let x = simulate_ar(&spec, 1_000_000, 2).unwrap();
        assert_abs_diff_eq!(lag1_autocorr(x.values()), 0.5, epsilon = 0.01);
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = ArSpec::new(0.1, vec![0.2, -0.1], 0.5).unwrap();
        let a = simulate_ar(&spec, 1000, 9).unwrap();
        let b = simulate_ar(&spec, 1000, 9).unwrap();
        assert_eq!(a, b);
        let m = TransitionSpec::uniform_two_lag(0.3, -0.2, 1.0).unwrap();
        assert_eq!(
            simulate_markov(&m, 500, 3).unwrap(),
            simulate_markov(&m, 500, 3).unwrap()
        );
    }

    #[test]
    fn stationarity_check() {
        assert!(ArSpec::new(0.0, vec![0.5, 0.3], 1.0)
            .unwrap()
            .is_stationary());
        assert!(!ArSpec::new(0.0, vec![1.1], 1.0).unwrap().is_stationary());
        assert!(!ArSpec::new(0.0, vec![0.6, 0.5], 1.0)
            .unwrap()
            .is_stationary());
    }

    #[test]
    fn fair_coin_markov() {
        let spec = TransitionSpec::constant(2, 0.0, 1.0).unwrap();
        let x = simulate_markov(&spec, 100_000, 4).unwrap();
        let ups = x.values().iter().filter(|v| **v >= 0.0).count() as f64;
        assert_abs_diff_eq!(ups / 1e5, 0.5, epsilon = 0.005);
    }

    #[test]
    fn one_lag_binomial() {
        let d = 0.3;
        let spec = TransitionSpec::new(1, vec![d, d], 1.0).unwrap();
        let x = simulate_markov(&spec, 200_000, 5).unwrap();
        let t = crate::series::empirical_sign_transitions(x.values(), 1).unwrap();
        let p = 0.5 * (1.0 + d);
        let n = t.visits[1] as f64;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((t.prob_up(1).unwrap() - p).abs() < 3.0 * se);
    }

    #[test]
    fn xor_like_markov_reproduces_pattern() {
        let spec = TransitionSpec::uniform_two_lag(0.5, -0.45, 1.0).unwrap();
        let x = simulate_markov(&spec, 200_000, 6).unwrap();
        let t = crate::series::empirical_sign_transitions(x.values(), 2).unwrap();
        // XOR: exactly one + in the inputs -> next is +
        assert!(t.prob_up(1).unwrap() > 0.7); // (-,+)
        assert!(t.prob_up(2).unwrap() > 0.7); // (+,-)
        assert!(t.prob_up(0).unwrap() < 0.3); // (-,-)
        assert!(t.prob_up(3).unwrap() < 0.3); // (+,+)
    }

    #[test]
    fn transition_matrix_structure() {
        let spec = TransitionSpec::new(1, vec![0.0, 0.0], 1.0).unwrap();
        let p = build_transition_matrix(&spec).unwrap();
        assert_eq!(p.0, DMatrix::from_element(2, 2, 0.5));
        let spec = TransitionSpec::uniform_two_lag(0.4, -0.2, 1.0).unwrap();
        let p = build_transition_matrix(&spec).unwrap();
        for s in p.row_sums().iter().chain(p.column_sums().iter()) {
            assert_abs_diff_eq!(*s, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn uniform_when_incoming_sum_to_one() {
        let spec = TransitionSpec::uniform_two_lag(0.37, 0.81, 1.0).unwrap();
        let st = stationary_distribution(&build_transition_matrix(&spec).unwrap()).unwrap();
        for p in &st.pi {
            assert_abs_diff_eq!(*p, 0.25, epsilon = 1e-12);
        }
        assert!(!st.reducible);
    }

    #[test]
    fn two_state_closed_form() {
        let d = 0.4;
        let spec = TransitionSpec::new(1, vec![d, -d], 1.0).unwrap();
        let st = stationary_distribution(&build_transition_matrix(&spec).unwrap()).unwrap();
        // pi_+ = p_{-+} / (p_{+-} + p_{-+})
        let p_minus_plus = spec.p_up(0);
        let p_plus_minus = spec.p_down(1);
        assert_abs_diff_eq!(
            st.pi[1],
            p_minus_plus / (p_plus_minus + p_minus_plus),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(st.pi[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_chains() {
        // deterministic alternation: periodic but irreducible
        let alt = TransitionSpec::new(1, vec![1.0, -1.0], 1.0).unwrap();
        let st = stationary_distribution(&build_transition_matrix(&alt).unwrap()).unwrap();
        assert!(!st.reducible);
        assert_abs_diff_eq!(st.pi[0], 0.5, epsilon = 1e-12);
        // two absorbing states
        let stuck = TransitionSpec::new(1, vec![-1.0, 1.0], 1.0).unwrap();
        let st = stationary_distribution(&build_transition_matrix(&stuck).unwrap()).unwrap();
        assert!(st.reducible);
        assert_abs_diff_eq!(st.pi.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn power_iteration_matches_linear_solve() {
        // oracle: solve (P - I) pi = 0 with the last equation replaced by sum = 1
        let spec =
            TransitionSpec::new(3, vec![0.3, -0.7, 0.1, 0.9, -0.2, 0.05, -0.6, 0.4], 1.0).unwrap();
        let p = build_transition_matrix(&spec).unwrap();
        let n = p.dim();
        let mut a = &p.0 - DMatrix::<f64>::identity(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        b[n - 1] = 1.0;
        let oracle = a.lu().solve(&b).unwrap();
        let st = stationary_distribution(&p).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(st.pi[i], oracle[i], epsilon = 1e-10);
        }
        let resid = &p.0 * DVector::from_vec(st.pi.clone()) - DVector::from_vec(st.pi.clone());
        assert!(resid.amax() <= 1e-10);
    }

    #[test]
    fn balancing() {
        let zero = TransitionSpec::constant(3, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(balancing_residual(&zero).unwrap(), 0.0, epsilon = 1e-12);
        let uni = TransitionSpec::uniform_two_lag(0.3, 0.6, 1.0).unwrap();
        assert_abs_diff_eq!(balancing_residual(&uni).unwrap(), 0.0, epsilon = 1e-10);
        let d = 0.25;
        let drift = TransitionSpec::new(1, vec![d, d], 1.0).unwrap();
        assert_abs_diff_eq!(balancing_residual(&drift).unwrap(), d, epsilon = 1e-10);
    }

    #[test]
    fn ar_blind_family_is_zero() {
        for d in [0.0, 0.1, 0.5, -0.3] {
            let spec = TransitionSpec::sign_pattern_two_lag(d, d, 1.0).unwrap();
            for v in expected_ar_estimator(&spec).unwrap() {
                assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
            }
        }
        let flat = TransitionSpec::constant(3, 0.0, 1.0).unwrap();
        assert!(expected_ar_estimator(&flat)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn symmetric_pairs_vanish_exhaustively() {
        // every assignment of gaps from a small grid with dp(S) = dp(-S)
        let grid = [-0.6, 0.0, 0.35, 0.8];
        for lag in 1..=3usize {
            let n = 1usize << lag;
            let half = n / 2;
            let combos = grid.len().pow(half as u32);
            for c in 0..combos {
                let mut dp = vec![0.0; n];
                let mut code = c;
                for i in 0..half {
                    let v = grid[code % grid.len()];
                    code /= grid.len();
                    dp[i] = v;
                    dp[i ^ (n - 1)] = v;
                }
                let spec = TransitionSpec::new(lag, dp, 1.0).unwrap();
                for v in expected_ar_estimator_uniform(&spec) {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn uniform_closed_form_matches_general_limit() {
        for (a, b) in [(0.3, 0.1), (-0.5, 0.4), (0.9, -0.2)] {
            let spec = TransitionSpec::uniform_two_lag(a, b, 1.0).unwrap();
            let closed = expected_ar_estimator_uniform(&spec);
            let general = population_ols_limit(&spec).unwrap();
            for (c, g) in closed.iter().zip(&general) {
                assert_abs_diff_eq!(c, g, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn directional_accuracy_formula() {
        assert_abs_diff_eq!(
            ar1_directional_accuracy(0.1).unwrap(),
            0.532,
            epsilon = 5e-4
        );
        assert_eq!(ar1_directional_accuracy(0.0).unwrap(), 0.5);
        for phi in [0.05, 0.3, 0.7, 0.95] {
            let up = ar1_directional_accuracy(phi).unwrap();
            let down = ar1_directional_accuracy(-phi).unwrap();
            assert_abs_diff_eq!(up + down, 1.0, epsilon = 1e-15);
        }
        assert!(matches!(
            ar1_directional_accuracy(1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn region_bias_white_noise() {
        let spec = ArSpec::new(0.0, vec![0.0, 0.0], 1.0).unwrap();
        let b = directional_bias_mc(&spec, 3, 200_000, 8).unwrap();
        assert!((b.probability - 0.5).abs() < 3.0 * b.std_error + 1e-12);
    }

    #[test]
    fn region_bias_antisymmetric_regions() {
        // phi1 = phi2: no bias in the mixed-sign regions
        let spec = ArSpec::new(0.0, vec![0.3, 0.3], 1.0).unwrap();
        for region in [1usize, 2] {
            let b = directional_bias_mc(&spec, region, 400_000, 9 + region as u64).unwrap();
            assert!((b.probability - 0.5).abs() < 3.5 * b.std_error, "{b:?}");
        }
        let same = directional_bias_mc(&spec, 3, 400_000, 12).unwrap();
        assert!(same.probability > 0.55);
    }

    #[test]
    fn region_bias_matches_ar1_closed_form() {
        let phi = 0.1;
        let spec = ArSpec::new(0.0, vec![phi], 1.0).unwrap();
        let b = directional_bias_mc(&spec, 1, 1_000_000, 13).unwrap();
        let closed = ar1_directional_accuracy(phi).unwrap();
        assert!(
            (b.probability - closed).abs() < 3.0 * b.std_error,
            "{b:?} vs {closed}"
        );
        // larger phi: the bivariate-normal orthant probability 1/2 + asin(phi)/pi
        let spec = ArSpec::new(0.0, vec![0.3], 1.0).unwrap();
        let b = directional_bias_mc(&spec, 1, 1_000_000, 14).unwrap();
        let orthant = 0.5 + 0.3f64.asin() / PI;
        assert!(
            (b.probability - orthant).abs() < 3.0 * b.std_error,
            "{b:?} vs {orthant}"
        );
    }

    #[test]
    fn bias_requires_samples() {
        let spec = ArSpec::white_noise(1.0);
        assert!(directional_bias_mc(&spec, 0, 100, 1).is_err());
    }

    fn table_from_probs(lag: usize, probs: &[f64]) -> SignTransitionTable {
        let visits = vec![1_000_000u64; probs.len()];
        let ups = probs.iter().map(|p| (p * 1e6).round() as u64).collect();
        SignTransitionTable { lag, visits, ups }
    }

    #[test]
    fn scaled_expectation_from_tables() {
        let fair = table_from_probs(2, &[0.5; 4]);
        assert!(expected_scaled_ar_from_transitions(&fair)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
        // daily reversal: P(- -> +) = 0.61, P(+ -> -) = 0.55
        let crisis = table_from_probs(1, &[0.61, 0.45]);
        let v = expected_scaled_ar_from_transitions(&crisis).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0] < 0.0 && v[0] > -0.05, "{v:?}");
        let mut incomplete = fair.clone();
        incomplete.visits[2] = 0;
        assert!(matches!(
            expected_scaled_ar_from_transitions(&incomplete),
            Err(Error::IncompleteTable { state: 2 })
        ));
    }

    #[test]
    fn spec_json_shape() {
        let spec = TransitionSpec::uniform_two_lag(0.5, -0.4, 1.0).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.starts_with(r#"{"lag":2,"delta_p":["#));
        let back: TransitionSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let ar: ArSpec =
            serde_json::from_str(r#"{"phi0":0.0,"phi":[0.2,0.1],"sigma":1.0}"#).unwrap();
        assert_eq!(ar.lag(), 2);
    }
}
