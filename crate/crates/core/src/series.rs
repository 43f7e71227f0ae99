//! Return and signal containers, strategy-return construction and the
//! performance metrics used in backtest reports.

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trading periods per year used for annualisation.
pub const PERIODS_PER_YEAR: f64 = 252.0;

/// Sign with the convention `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// A dated sequence of simple returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("return series must not be empty"));
        }
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                actual: dates.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite return at index {i}")));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "dates not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { dates, values })
    }

    /// Series on a synthetic daily calendar starting 2000-01-01; used for
    /// simulated data where dates carry no meaning.
    pub fn undated(values: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..values.len())
            .map(|i| start + Days::new(i as u64))
            .collect();
        Self::new(dates, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// The last `len` observations.
    pub fn tail(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::invalid(format!(
                "tail of length {len} from series of length {}",
                self.len()
            )));
        }
        let start = self.len() - len;
        Ok(Self {
            dates: self.dates[start..].to_vec(),
            values: self.values[start..].to_vec(),
        })
    }

    /// Observations `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::invalid(format!(
                "slice {start}..{end} of series of length {}",
                self.len()
            )));
        }
        Ok(Self {
            dates: self.dates[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        })
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.dates.clone(), values)
    }
}

/// Long/short positions, one per forecast period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSeries(Vec<i8>);

impl SignalSeries {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!(
                "signal at index {i} is {}, expected +1 or -1",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn all_long(len: usize) -> Self {
        Self(vec![1; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    /// Number of position changes between consecutive signals.
    pub fn changes(&self) -> usize {
        self.0.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Per-period number of sides traded: the first period enters a position
    /// from flat, later periods trade when the signal flips.
    pub fn sides_traded(&self) -> impl Iterator<Item = u8> + '_ {
        self.0
            .iter()
            .enumerate()
            .map(|(t, &s)| if t == 0 || self.0[t - 1] != s { 1 } else { 0 })
    }
}

/// Per-period strategy returns `s_t * r_t`, less `cost_per_side` each time a
/// position is entered or flipped. Signals align with the last
/// `signals.len()` returns.
pub fn strategy_returns(
    returns: &ReturnSeries,
    signals: &SignalSeries,
    cost_per_side: f64,
) -> Result<ReturnSeries> {
    if signals.len() > returns.len() || signals.is_empty() {
        return Err(Error::LengthMismatch {
            expected: returns.len(),
            actual: signals.len(),
        });
    }
    if !(cost_per_side >= 0.0) {
        return Err(Error::invalid("cost per side must be non-negative"));
    }
    let suffix = returns.tail(signals.len())?;
    let values = net_returns(suffix.values(), signals, cost_per_side);
    suffix.with_values(values)
}

pub(crate) fn net_returns(returns: &[f64], signals: &SignalSeries, cost_per_side: f64) -> Vec<f64> {
    returns
        .iter()
        .zip(signals.values())
        .zip(signals.sides_traded())
        .map(|((&r, &s), sides)| f64::from(s) * r - cost_per_side * f64::from(sides))
        .collect()
}

/// Headline metrics of one strategy against its benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSummary {
    /// Compounded annual return.
    pub annual_return: f64,
    /// Annualised Sharpe ratio, no risk-free adjustment.
    pub annual_sharpe: f64,
    /// Largest peak-to-trough loss of the wealth curve, as a negative fraction.
    pub max_drawdown: f64,
    /// Signal changes divided by two.
    pub round_trips: f64,
    /// Cost per round trip at which compounded wealth matches the benchmark.
    pub break_even_cost: f64,
}

pub fn annualised_return(returns: &[f64]) -> f64 {
    let log_wealth: f64 = returns.iter().map(|r| (1.0 + r).ln()).sum();
    (log_wealth * PERIODS_PER_YEAR / returns.len() as f64).exp() - 1.0
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.iter().all(|v| *v == values[0]) {
        // exact zero instead of rounding residue
        return (values[0], 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn annualised_sharpe(returns: &[f64]) -> Result<f64> {
    let (mean, sd) = mean_std(returns);
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance("strategy returns"));
    }
    Ok(mean / sd * PERIODS_PER_YEAR.sqrt())
}

pub fn max_drawdown(returns: &[f64]) -> f64 {
    let mut wealth = 1.0_f64;
    let mut peak = 1.0_f64;
    let mut worst = 0.0_f64;
    for r in returns {
        wealth *= 1.0 + r;
        peak = peak.max(wealth);
        worst = worst.min(wealth / peak - 1.0);
    }
    worst
}

pub fn wealth_curve(returns: &[f64]) -> Vec<f64> {
    returns
        .iter()
        .scan(1.0, |w, r| {
            *w *= 1.0 + r;
            Some(*w)
        })
        .collect()
}

fn log_wealth(returns: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    for r in returns {
        if r <= -1.0 {
            return f64::NEG_INFINITY;
        }
        acc += r.ln_1p();
    }
    acc
}

const BREAK_EVEN_BRACKET: (f64, f64) = (0.0, 0.05);
const BREAK_EVEN_TOL: f64 = 1e-8;

/// Cost per round trip (two sides) that equates the strategy's net
/// compounded wealth with the benchmark's. Zero when the strategy does not
/// beat the benchmark gross; capped at the upper end of the search bracket.
pub fn break_even_cost(gross: &[f64], signals: &SignalSeries, benchmark: &[f64]) -> f64 {
    let target = log_wealth(benchmark.iter().copied());
    let sides: Vec<u8> = signals.sides_traded().collect();
    let excess = |round_trip_cost: f64| {
        let half = 0.5 * round_trip_cost;
        log_wealth(
            gross
                .iter()
                .zip(&sides)
                .map(|(g, &k)| g - half * f64::from(k)),
        ) - target
    };
    let (mut lo, mut hi) = BREAK_EVEN_BRACKET;
    if excess(lo) <= 0.0 {
        return 0.0;
    }
    if excess(hi) > 0.0 {
        return hi;
    }
    while hi - lo > BREAK_EVEN_TOL {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Summary of a strategy's gross returns and the signal path producing them.
pub fn summarize(
    strategy: &ReturnSeries,
    signals: &SignalSeries,
    benchmark: &ReturnSeries,
) -> Result<PerformanceSummary> {
    let n = strategy.len();
    if n < 2 {
        return Err(Error::invalid("summary needs at least two periods"));
    }
    if benchmark.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: benchmark.len(),
        });
    }
    if signals.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: signals.len(),
        });
    }
    let r = strategy.values();
    Ok(PerformanceSummary {
        annual_return: annualised_return(r),
        annual_sharpe: annualised_sharpe(r)?,
        max_drawdown: max_drawdown(r),
        round_trips: signals.changes() as f64 / 2.0,
        break_even_cost: break_even_cost(r, signals, benchmark.values()),
    })
}

/// Empirical `P(next return >= 0 | sign state)` over all `2^lag` states.
///
/// States are indexed by the sign tuple read as a binary number with `+` as
/// 1 and the most recent sign in the least-significant bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTransitionTable {
    pub lag: usize,
    /// Occurrences of each state followed by an observed next return.
    pub visits: Vec<u64>,
    /// How many of those next returns were non-negative.
    pub ups: Vec<u64>,
}

impl SignTransitionTable {
    pub fn prob_up(&self, state: usize) -> Option<f64> {
        match self.visits[state] {
            0 => None,
            n => Some(self.ups[state] as f64 / n as f64),
        }
    }

    /// States never observed.
    pub fn unvisited(&self) -> Vec<usize> {
        (0..self.visits.len())
            .filter(|&i| self.visits[i] == 0)
            .collect()
    }
}

/// Render a state index as its sign tuple, oldest sign first, e.g. `"-+"`.
pub fn state_label(state: usize, lag: usize) -> String {
    (0..lag)
        .rev()
        .map(|bit| if state >> bit & 1 == 1 { '+' } else { '-' })
        .collect()
}

/// State index of a window of returns, oldest first.
pub fn sign_state(window: &[f64]) -> usize {
    window
        .iter()
        .fold(0usize, |acc, &x| (acc << 1) | usize::from(sign(x) > 0))
}

pub fn empirical_sign_transitions(returns: &[f64], lag: usize) -> Result<SignTransitionTable> {
    if lag == 0 || returns.len() <= lag {
        return Err(Error::invalid(format!(
            "need more than {lag} returns for lag {lag}, got {}",
            returns.len()
        )));
    }
    let states = 1usize << lag;
    let mut visits = vec![0u64; states];
    let mut ups = vec![0u64; states];
    for t in lag..returns.len() {
        let s = sign_state(&returns[t - lag..t]);
        visits[s] += 1;
        if sign(returns[t]) > 0 {
            ups[s] += 1;
        }
    }
    Ok(SignTransitionTable { lag, visits, ups })
}
