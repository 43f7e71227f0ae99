//! Rolling-window forecasting strategies and strategy universes.
//!
//! A strategy is a forecaster (AR or one of four tree variants), a lag and a
//! calibration window `L`. At each step it is refit on the trailing `L`
//! returns and goes long or short on the sign of its one-step forecast, so a
//! series of length `T` yields `T - L` signals.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dgp::ArSpec;
use crate::error::{Error, Result};
use crate::ols;
use crate::par;
use crate::series::{
    mean_std, net_returns, sign, sign_state, strategy_returns, summarize, PerformanceSummary,
    ReturnSeries, SignalSeries,
};
use crate::trees::{fit_cart, lagged_samples, FixedTree, Loss, PredictMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "AR")]
    Ar,
    #[serde(rename = "RT_MSE")]
    RtMse,
    #[serde(rename = "CT_Gini")]
    CtGini,
    #[serde(rename = "FRT")]
    Frt,
    #[serde(rename = "FCT")]
    Fct,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Ar,
        ModelKind::RtMse,
        ModelKind::CtGini,
        ModelKind::Frt,
        ModelKind::Fct,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Ar => "AR",
            ModelKind::RtMse => "RT_MSE",
            ModelKind::CtGini => "CT_Gini",
            ModelKind::Frt => "FRT",
            ModelKind::Fct => "FCT",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "AR" => Ok(ModelKind::Ar),
            "RT_MSE" | "RT" => Ok(ModelKind::RtMse),
            "CT_GINI" | "CT" => Ok(ModelKind::CtGini),
            "FRT" => Ok(ModelKind::Frt),
            "FCT" => Ok(ModelKind::Fct),
            _ => Err(Error::invalid(format!("unknown model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategySpec {
    pub model: ModelKind,
    pub lag: usize,
    pub window: usize,
}

impl StrategySpec {
    pub fn new(model: ModelKind, lag: usize, window: usize) -> Result<Self> {
        let spec = Self { model, lag, window };
        spec.validate()?;
        Ok(spec)
    }

    /// Windows shorter than `2^lag` are accepted for fixed trees; states not
    /// seen in the window forecast long.
    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 || self.lag > crate::dgp::MAX_MARKOV_LAG {
            return Err(Error::invalid(format!("lag {} out of range", self.lag)));
        }
        if self.window <= self.lag + 1 {
            return Err(Error::invalid(format!(
                "window {} too short for lag {}",
                self.window, self.lag
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.model, self.lag, self.window)
    }

    /// Minimum leaf size of the dynamic trees: the 100-sample bound, capped at
    /// a quarter of the window so that short windows can still split.
    pub fn min_samples_leaf(&self) -> usize {
        (self.window / 4).clamp(1, 100)
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    /// Parses `model/lag/window`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split('/').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!(
                "expected model/lag/window, got '{s}'"
            )));
        }
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad number '{p}' in '{s}'")))
        };
        StrategySpec::new(parts[0].parse()?, num(parts[1])?, num(parts[2])?)
    }
}

/// Inclusive arithmetic range of window lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowRange {
    pub start: usize,
    pub stop: usize,
    pub step: usize,
}

impl WindowRange {
    pub fn values(&self) -> Vec<usize> {
        if self.step == 0 || self.start > self.stop {
            return Vec::new();
        }
        (self.start..=self.stop).step_by(self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub models: Vec<ModelKind>,
    pub lags: Vec<usize>,
    pub windows: WindowRange,
}

impl Default for GridSpec {
    /// Five models, lags 1 to 4, windows 10 to 500 in steps of 10.
    fn default() -> Self {
        Self {
            models: ModelKind::ALL.to_vec(),
            lags: vec![1, 2, 3, 4],
            windows: WindowRange {
                start: 10,
                stop: 500,
                step: 10,
            },
        }
    }
}

impl GridSpec {
    /// Strategies ordered by model, then lag, then window.
    pub fn specs(&self) -> Result<Vec<StrategySpec>> {
        let mut out = Vec::new();
        for &model in &self.models {
            for &lag in &self.lags {
                for window in self.windows.values() {
                    out.push(StrategySpec::new(model, lag, window)?);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::invalid("strategy grid is empty"));
        }
        Ok(out)
    }

    /// Whether the grid stays inside the default grid's lag and window bounds.
    pub fn within_default_bounds(&self) -> bool {
        let d = GridSpec::default();
        self.lags.iter().all(|l| d.lags.contains(l))
            && self.windows.step > 0
            && self.windows.start >= d.windows.start
            && self.windows.stop <= d.windows.stop
    }
}

/// Least-squares AR fit with intercept. `phi[k - 1]` multiplies `X_{t-k}`;
/// `sigma` is the residual standard deviation (zero for an exact fit).
pub fn fit_ar_ols(window: &[f64], lag: usize) -> Result<ArSpec> {
    if lag == 0 {
        return Err(Error::invalid("lag must be positive"));
    }
    if window.len() <= lag + 1 {
        return Err(Error::InsufficientSamples(format!(
            "window of {} too short for an AR({lag}) fit",
            window.len()
        )));
    }
    let (rows, y) = ar_design(window, lag);
    let fit = ols::fit(&rows, &y)?;
    Ok(ArSpec {
        phi0: fit.intercept(),
        // rows are chronological, so the last regressor is lag 1
        phi: fit.slopes().iter().rev().copied().collect(),
        sigma: if fit.sigma.is_finite() {
            fit.sigma
        } else {
            0.0
        },
    })
}

fn ar_design(window: &[f64], lag: usize) -> (Vec<&[f64]>, Vec<f64>) {
    let rows = (lag..window.len()).map(|j| &window[j - lag..j]).collect();
    let y = window[lag..].to_vec();
    (rows, y)
}

fn ar_forecast(window: &[f64], lag: usize) -> Result<f64> {
    let (rows, y) = ar_design(window, lag);
    match ols::fit(&rows, &y) {
        Ok(fit) => {
            let last = &window[window.len() - lag..];
            Ok(fit.intercept()
                + last
                    .iter()
                    .zip(fit.slopes())
                    .map(|(x, b)| x * b)
                    .sum::<f64>())
        }
        // degenerate window: fall back to the intercept-only model
        Err(Error::Singular { .. }) => Ok(y.iter().sum::<f64>() / y.len() as f64),
        Err(e) => Err(e),
    }
}

/// Signals of one strategy on a plain return path: entry `t` is the position
/// held over return `t + L`.
pub fn forecast_signals(returns: &[f64], spec: &StrategySpec) -> Result<Vec<i8>> {
    spec.validate()?;
    let (lag, l) = (spec.lag, spec.window);
    if returns.len() <= l + 1 {
        return Err(Error::InsufficientSamples(format!(
            "series of {} returns too short for window {l}",
            returns.len()
        )));
    }
    let t_max = returns.len();
    match spec.model {
        ModelKind::Ar => (l..t_max)
            .map(|t| ar_forecast(&returns[t - l..t], lag).map(sign))
            .collect(),
        ModelKind::RtMse | ModelKind::CtGini => {
            let (loss, mode) = if spec.model == ModelKind::RtMse {
                (Loss::Mse, PredictMode::Regression)
            } else {
                (Loss::Gini, PredictMode::Classification)
            };
            (l..t_max)
                .map(|t| {
                    let window = &returns[t - l..t];
                    let tree =
                        fit_cart(&lagged_samples(window, lag), loss, spec.min_samples_leaf())?;
                    Ok(sign(tree.predict(&window[l - lag..], mode)))
                })
                .collect()
        }
        ModelKind::Frt => {
            let states = sign_states(returns, lag);
            Ok((l..t_max)
                .map(|t| {
                    let mut tree = FixedTree::empty(lag);
                    for j in t - l + lag..t {
                        tree.add(states[j], returns[j]);
                    }
                    sign(tree.predict_state(states[t], PredictMode::Regression))
                })
                .collect())
        }
        ModelKind::Fct => {
            // class counts are integers, so rolling updates equal a refit
            let states = sign_states(returns, lag);
            let mut tree = FixedTree::empty(lag);
            for j in lag..l {
                tree.add(states[j], returns[j]);
            }
            let mut out = Vec::with_capacity(t_max - l);
            for t in l..t_max {
                out.push(sign(
                    tree.predict_state(states[t], PredictMode::Classification),
                ));
                if t + 1 < t_max {
                    tree.add(states[t], returns[t]);
                    let old = t - l + lag;
                    tree.remove(states[old], returns[old]);
                }
            }
            Ok(out)
        }
    }
}

/// `states[j]` is the sign state of the `lag` returns before `j` (0 for `j < lag`).
fn sign_states(returns: &[f64], lag: usize) -> Vec<usize> {
    (0..=returns.len())
        .map(|j| {
            if j < lag {
                0
            } else {
                sign_state(&returns[j - lag..j])
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub spec: StrategySpec,
    pub signals: SignalSeries,
    pub returns: ReturnSeries,
    /// `None` when the strategy returns have zero variance.
    pub summary: Option<PerformanceSummary>,
}

/// Backtest one strategy without transaction costs.
pub fn run_strategy(returns: &ReturnSeries, spec: &StrategySpec) -> Result<StrategyRun> {
    let signals = SignalSeries::new(forecast_signals(returns.values(), spec)?)?;
    let strat = strategy_returns(returns, &signals, 0.0)?;
    let bench = returns.tail(signals.len())?;
    let summary = match summarize(&strat, &signals, &bench) {
        Ok(s) => Some(s),
        Err(Error::ZeroVariance(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(StrategyRun {
        spec: *spec,
        signals,
        returns: strat,
        summary,
    })
}

/// Strategy returns and signals on a common date range, plus buy-and-hold.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMatrix {
    pub specs: Vec<StrategySpec>,
    pub dates: Vec<NaiveDate>,
    /// One column of gross returns per strategy.
    pub returns: Vec<Vec<f64>>,
    pub signals: Vec<Vec<i8>>,
    pub benchmark: Vec<f64>,
}

impl StrategyMatrix {
    /// Matrix whose strategy returns are `signal * benchmark`.
    pub fn from_signals(
        specs: Vec<StrategySpec>,
        dates: Vec<NaiveDate>,
        benchmark: Vec<f64>,
        signals: Vec<Vec<i8>>,
    ) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::invalid(
                "strategy matrix needs at least one strategy",
            ));
        }
        if specs.len() != signals.len() {
            return Err(Error::LengthMismatch {
                expected: specs.len(),
                actual: signals.len(),
            });
        }
        if dates.len() != benchmark.len() {
            return Err(Error::LengthMismatch {
                expected: benchmark.len(),
                actual: dates.len(),
            });
        }
        for col in &signals {
            if col.len() != benchmark.len() {
                return Err(Error::LengthMismatch {
                    expected: benchmark.len(),
                    actual: col.len(),
                });
            }
            SignalSeries::new(col.clone())?;
        }
        let returns = signals
            .iter()
            .map(|col| {
                col.iter()
                    .zip(&benchmark)
                    .map(|(&s, &r)| f64::from(s) * r)
                    .collect()
            })
            .collect();
        Ok(Self {
            specs,
            dates,
            returns,
            signals,
            benchmark,
        })
    }

    pub fn n_periods(&self) -> usize {
        self.benchmark.len()
    }

    pub fn n_strategies(&self) -> usize {
        self.specs.len()
    }

    pub fn signal_series(&self, s: usize) -> SignalSeries {
        SignalSeries::new(self.signals[s].clone()).expect("validated signals")
    }

    pub fn benchmark_series(&self) -> Result<ReturnSeries> {
        ReturnSeries::new(self.dates.clone(), self.benchmark.clone())
    }

    /// Returns of strategy `s` net of `cost_per_side` per trade.
    pub fn net_column(&self, s: usize, cost_per_side: f64) -> Vec<f64> {
        net_returns(&self.benchmark, &self.signal_series(s), cost_per_side)
    }

    /// Per-strategy summaries net of costs; `None` for zero-variance columns.
    pub fn summaries(&self, cost_per_side: f64) -> Result<Vec<Option<PerformanceSummary>>> {
        let bench = self.benchmark_series()?;
        par::map_indexed(self.n_strategies(), |s| {
            let signals = self.signal_series(s);
            let strat = bench.with_values(net_returns(&self.benchmark, &signals, cost_per_side))?;
            match summarize(&strat, &signals, &bench) {
                Ok(v) => Ok(Some(v)),
                Err(Error::ZeroVariance(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .into_iter()
        .collect()
    }
}

/// Run every strategy of the grid and align all of them on the suffix left
/// after the longest window.
pub fn build_universe(returns: &ReturnSeries, grid: &[StrategySpec]) -> Result<StrategyMatrix> {
    if grid.is_empty() {
        return Err(Error::invalid("strategy grid is empty"));
    }
    let max_window = grid.iter().map(|s| s.window).max().expect("non-empty");
    if max_window + 1 >= returns.len() {
        return Err(Error::InsufficientSamples(format!(
            "longest window {max_window} leaves no forecasts on {} returns",
            returns.len()
        )));
    }
    let values = returns.values();
    let runs = par::map_slice(grid, |spec| forecast_signals(values, spec));
    let n = returns.len() - max_window;
    let signals = runs
        .into_iter()
        .map(|r| r.map(|col| col[col.len() - n..].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    StrategyMatrix::from_signals(
        grid.to_vec(),
        returns.dates()[max_window..].to_vec(),
        values[max_window..].to_vec(),
        signals,
    )
}

/// Path of a strategy that, each period, follows the signal of the strategy
/// with the best Sharpe ratio so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchPath {
    /// Selected strategy per period; `None` while warming up on buy-and-hold.
    pub selected: Vec<Option<usize>>,
    pub signals: SignalSeries,
    /// Net returns of the followed positions.
    pub returns: Vec<f64>,
}

/// Periods spent on buy-and-hold before the search starts selecting.
pub const SEARCH_WARM_UP: usize = 60;

fn sharpe_from_sums(sum: f64, sum_sq: f64, n: f64) -> f64 {
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    if var > 0.0 {
        mean / var.sqrt()
    } else if mean > 0.0 {
        f64::INFINITY
    } else if mean < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Expanding-window Sharpe selection over a strategy universe. Sharpe ratios
/// use each strategy's returns net of `cost_round_trip / 2` per side up to
/// the previous period; ties go to the lowest strategy index.
pub fn search_technology(matrix: &StrategyMatrix, cost_round_trip: f64) -> Result<SearchPath> {
    if !(cost_round_trip >= 0.0) {
        return Err(Error::invalid("transaction cost must be non-negative"));
    }
    let per_side = cost_round_trip / 2.0;
    let n_strat = matrix.n_strategies();
    let t_max = matrix.n_periods();
    let net: Vec<Vec<f64>> = (0..n_strat)
        .map(|s| matrix.net_column(s, per_side))
        .collect();
    let mut sum = vec![0.0; n_strat];
    let mut sum_sq = vec![0.0; n_strat];
    let mut selected = Vec::with_capacity(t_max);
    let mut signals = Vec::with_capacity(t_max);
    for t in 0..t_max {
        let pick = if t < SEARCH_WARM_UP.max(2) {
            None
        } else {
            let mut best = 0;
            let mut best_sharpe = f64::NEG_INFINITY;
            for s in 0..n_strat {
                let sh = sharpe_from_sums(sum[s], sum_sq[s], t as f64);
                if s == 0 || sh > best_sharpe {
                    best = s;
                    best_sharpe = sh;
                }
            }
            Some(best)
        };
        selected.push(pick);
        signals.push(pick.map_or(1, |s| matrix.signals[s][t]));
        for s in 0..n_strat {
            sum[s] += net[s][t];
            sum_sq[s] += net[s][t] * net[s][t];
        }
    }
    let signals = SignalSeries::new(signals)?;
    let returns = net_returns(&matrix.benchmark, &signals, per_side);
    Ok(SearchPath {
        selected,
        signals,
        returns,
    })
}

/// Directional hit rate of a signal path against the realised returns.
pub fn directional_accuracy(signals: &[i8], realised: &[f64]) -> f64 {
    let hits = signals
        .iter()
        .zip(realised)
        .filter(|(&s, &r)| s == sign(r))
        .count();
    hits as f64 / signals.len() as f64
}

/// Mean and standard error of a sample, used by simulation summaries.
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let (m, sd) = mean_std(values);
    let n = values.len() as f64;
    let se = if n > 1.0 {
        sd * (n / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    (m, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{self, TransitionSpec};
    use crate::rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.label().parse::<ModelKind>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.label()));
        }
        let spec: StrategySpec = "FCT/2/370".parse().unwrap();
        assert_eq!(spec, StrategySpec::new(ModelKind::Fct, 2, 370).unwrap());
        assert_eq!(spec.label(), "FCT/2/370");
    }

    #[test]
    fn default_grid_has_1000_strategies() {
        let grid = GridSpec::default();
        assert_eq!(grid.specs().unwrap().len(), 1000);
        assert!(grid.within_default_bounds());
        let json =
            r#"{"models":["AR","FCT"],"lags":[1,2],"windows":{"start":10,"stop":30,"step":10}}"#;
        let g: GridSpec = serde_json::from_str(json).unwrap();
        assert_eq!(g.specs().unwrap().len(), 12);
    }

    #[test]
    fn ar_fit_exact_recursion() {
        let mut y = vec![1.0];
        for _ in 0..20 {
            y.push(0.5 * y.last().unwrap());
        }
        let fit = fit_ar_ols(&y, 1).unwrap();
        assert_abs_diff_eq!(fit.phi[0], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.phi0, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn ar_fit_consistency() {
        let spec = ArSpec::new(0.0, vec![0.3], 1.0).unwrap();
        let x = dgp::simulate_ar(&spec, 100_000, 21).unwrap();
        let fit = fit_ar_ols(x.values(), 1).unwrap();
        assert!((fit.phi[0] - 0.3).abs() < 0.01);
        assert!((fit.sigma - 1.0).abs() < 0.01);
    }

    #[test]
    fn ar_fit_lag_order() {
        let spec = ArSpec::new(0.0, vec![0.4, -0.3], 1.0).unwrap();
        let x = dgp::simulate_ar(&spec, 200_000, 22).unwrap();
        let fit = fit_ar_ols(x.values(), 2).unwrap();
        assert!((fit.phi[0] - 0.4).abs() < 0.01, "{fit:?}");
        assert!((fit.phi[1] + 0.3).abs() < 0.01, "{fit:?}");
    }

    #[test]
    fn ar_fit_rank_deficient() {
        assert!(matches!(
            fit_ar_ols(&[0.01; 20], 2),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn fct_anticipates_alternation() {
        let r: Vec<f64> = (0..30)
            .map(|i| if i % 2 == 0 { 0.01 } else { -0.01 })
            .collect();
        let spec = StrategySpec::new(ModelKind::Fct, 1, 4).unwrap();
        let sig = forecast_signals(&r, &spec).unwrap();
        assert_eq!(sig.len(), 26);
        for (k, s) in sig.iter().enumerate() {
            assert_eq!(*s, sign(r[4 + k]));
        }
    }

    #[test]
    fn constant_window_goes_long() {
        let r = ReturnSeries::undated(vec![0.0; 40]).unwrap();
        for model in ModelKind::ALL {
            let run = run_strategy(&r, &StrategySpec::new(model, 2, 10).unwrap()).unwrap();
            assert!(run.signals.values().iter().all(|&s| s == 1), "{model}");
        }
    }

    #[test]
    fn signal_lengths() {
        let x = dgp::simulate_ar(&ArSpec::white_noise(0.01), 300, 3).unwrap();
        for model in ModelKind::ALL {
            let spec = StrategySpec::new(model, 3, 40).unwrap();
            let run = run_strategy(&x, &spec).unwrap();
            assert_eq!(run.signals.len(), 260);
            assert_eq!(run.returns.len(), 260);
            assert!(run.summary.is_some());
        }
        assert!(run_strategy(&x, &StrategySpec::new(ModelKind::Ar, 1, 299).unwrap()).is_err());
    }

    fn naive_fixed_signals(r: &[f64], lag: usize, l: usize, mode: PredictMode) -> Vec<i8> {
        (l..r.len())
            .map(|t| {
                let w = &r[t - l..t];
                let tree = crate::trees::fit_fixed(&lagged_samples(w, lag), lag).unwrap();
                sign(tree.predict(&w[l - lag..], mode))
            })
            .collect()
    }

    #[test]
    fn rolling_fixed_trees_match_refit() {
        let spec = TransitionSpec::uniform_two_lag(0.3, -0.2, 0.01).unwrap();
        let x = dgp::simulate_markov(&spec, 2000, 4).unwrap();
        for lag in 1..=3 {
            for l in [8, 50, 333] {
                let fct = forecast_signals(
                    x.values(),
                    &StrategySpec::new(ModelKind::Fct, lag, l).unwrap(),
                )
                .unwrap();
                assert_eq!(
                    fct,
                    naive_fixed_signals(x.values(), lag, l, PredictMode::Classification)
                );
                let frt = forecast_signals(
                    x.values(),
                    &StrategySpec::new(ModelKind::Frt, lag, l).unwrap(),
                )
                .unwrap();
                assert_eq!(
                    frt,
                    naive_fixed_signals(x.values(), lag, l, PredictMode::Regression)
                );
            }
        }
    }

    #[test]
    fn fct_reaches_markov_optimum() {
        let spec = TransitionSpec::sign_pattern_two_lag(0.3, 0.3, 1.0).unwrap();
        let x = dgp::simulate_markov(&spec, 100_000, 5).unwrap();
        let s = StrategySpec::new(ModelKind::Fct, 2, 500).unwrap();
        let sig = forecast_signals(x.values(), &s).unwrap();
        let acc = directional_accuracy(&sig, &x.values()[500..]);
        // uniform states, each predictable with probability (1 + 0.3) / 2
        let optimum = 0.65;
        let se = (optimum * (1.0 - optimum) / sig.len() as f64).sqrt();
        assert!((acc - optimum).abs() < 4.0 * se + 0.003, "{acc}");
    }

    #[test]
    fn universe_alignment() {
        let x = dgp::simulate_ar(&ArSpec::white_noise(0.01), 400, 6).unwrap();
        let grid = vec![
            StrategySpec::new(ModelKind::Fct, 1, 20).unwrap(),
            StrategySpec::new(ModelKind::Ar, 2, 100).unwrap(),
            StrategySpec::new(ModelKind::Fct, 1, 20).unwrap(),
        ];
        let m = build_universe(&x, &grid).unwrap();
        assert_eq!(m.n_periods(), 300);
        assert_eq!(m.dates[0], x.dates()[100]);
        assert_eq!(m.returns[0], m.returns[2]);
        let full = forecast_signals(x.values(), &grid[0]).unwrap();
        assert_eq!(m.signals[0], full[80..]);
        assert!(build_universe(&x, &[]).is_err());
    }

    #[test]
    fn all_long_column_equals_benchmark() {
        // strictly increasing prices: every forecaster goes long
        let x = ReturnSeries::undated(vec![0.001; 200]).unwrap();
        let m = build_universe(&x, &[StrategySpec::new(ModelKind::Fct, 2, 50).unwrap()]).unwrap();
        assert_eq!(m.returns[0], m.benchmark);
    }

    #[test]
    fn search_single_strategy_constant() {
        let x = dgp::simulate_ar(&ArSpec::white_noise(0.01), 300, 7).unwrap();
        let m = build_universe(&x, &[StrategySpec::new(ModelKind::Fct, 1, 20).unwrap()]).unwrap();
        let path = search_technology(&m, 0.001).unwrap();
        assert!(path.selected[..SEARCH_WARM_UP].iter().all(Option::is_none));
        assert!(path.selected[SEARCH_WARM_UP..]
            .iter()
            .all(|s| *s == Some(0)));
    }

    fn synthetic_matrix(signals: Vec<Vec<i8>>, bench: Vec<f64>) -> StrategyMatrix {
        let n = signals.len();
        let specs = (0..n)
            .map(|i| StrategySpec::new(ModelKind::Fct, 1, 10 + i).unwrap())
            .collect();
        let dates = ReturnSeries::undated(bench.clone())
            .unwrap()
            .dates()
            .to_vec();
        StrategyMatrix::from_signals(specs, dates, bench, signals).unwrap()
    }

    #[test]
    fn dominated_strategy_never_selected() {
        let mut g = rng::stream(8, 0);
        let bench: Vec<f64> = (0..200).map(|_| 0.01 * rng::normal(&mut g)).collect();
        let perfect: Vec<i8> = bench.iter().map(|&r| sign(r)).collect();
        let worst: Vec<i8> = perfect.iter().map(|s| -s).collect();
        let m = synthetic_matrix(vec![worst, perfect], bench);
        let path = search_technology(&m, 0.0).unwrap();
        assert!(path.selected[SEARCH_WARM_UP..]
            .iter()
            .all(|s| *s == Some(1)));
    }

    #[test]
    fn search_matches_brute_force() {
        // three strategies whose cumulative Sharpe ratios cross over
        let mut g = rng::stream(9, 0);
        let t_max = 400;
        let bench: Vec<f64> = (0..t_max).map(|_| 0.01 * rng::normal(&mut g)).collect();
        let good_until = |k: usize| -> Vec<i8> {
            bench
                .iter()
                .enumerate()
                .map(|(t, &r)| if t < k { sign(r) } else { -sign(r) })
                .collect()
        };
        let signals = vec![good_until(150), good_until(250), vec![1; t_max]];
        let m = synthetic_matrix(signals, bench);
        let cost = 0.0004;
        let path = search_technology(&m, cost).unwrap();
        for t in SEARCH_WARM_UP..t_max {
            let mut best = (0, f64::NEG_INFINITY);
            for s in 0..3 {
                let net = m.net_column(s, cost / 2.0);
                let (mean, sd) = mean_std(&net[..t]);
                let sh = mean / sd;
                if sh > best.1 {
                    best = (s, sh);
                }
            }
            assert_eq!(path.selected[t], Some(best.0), "t = {t}");
        }
        assert!(path.selected.contains(&Some(1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn signals_are_signs(seed in any::<u64>(), lag in 1usize..4, l in 12usize..40, model in 0usize..5) {
            let x = dgp::simulate_ar(&ArSpec::white_noise(0.01), 120, seed).unwrap();
            let spec = StrategySpec::new(ModelKind::ALL[model], lag, l).unwrap();
            let sig = forecast_signals(x.values(), &spec).unwrap();
            prop_assert_eq!(sig.len(), 120 - l);
            prop_assert!(sig.iter().all(|s| *s == 1 || *s == -1));
        }

        #[test]
        fn frt_fct_agree_on_one_sided_windows(seed in any::<u64>(), lag in 1usize..3) {
            // magnitudes only differ by state; all outputs in a state share
            // a sign when returns are deterministic in the state
            let mut g = rng::stream(seed, 0);
            let mut r: Vec<f64> = (0..lag).map(|_| 0.01 * rng::normal(&mut g)).collect();
            let pattern: Vec<bool> = (0..1usize << lag).map(|_| rand::Rng::random(&mut g)).collect();
            for t in lag..150 {
                let up = pattern[sign_state(&r[t - lag..t])];
                let m = 0.001 + 0.01 * rng::normal(&mut g).abs();
                r.push(if up { m } else { -m });
            }
            let frt = forecast_signals(&r, &StrategySpec::new(ModelKind::Frt, lag, 30).unwrap()).unwrap();
            let fct = forecast_signals(&r, &StrategySpec::new(ModelKind::Fct, lag, 30).unwrap()).unwrap();
            prop_assert_eq!(frt, fct);
        }

        #[test]
        fn universe_is_permutation_equivariant(seed in any::<u64>(), rot in 0usize..4) {
            let x = dgp::simulate_ar(&ArSpec::white_noise(0.01), 150, seed).unwrap();
            let grid = vec![
                StrategySpec::new(ModelKind::Ar, 1, 20).unwrap(),
                StrategySpec::new(ModelKind::Fct, 2, 30).unwrap(),
                StrategySpec::new(ModelKind::CtGini, 1, 40).unwrap(),
                StrategySpec::new(ModelKind::Frt, 3, 25).unwrap(),
            ];
            let mut rotated = grid.clone();
            rotated.rotate_left(rot);
            let a = build_universe(&x, &grid).unwrap();
            let b = build_universe(&x, &rotated).unwrap();
            for (i, spec) in rotated.iter().enumerate() {
                let j = grid.iter().position(|g| g == spec).unwrap();
                prop_assert_eq!(&b.signals[i], &a.signals[j]);
            }
        }
    }
}
