//! Circular block bootstraps, bootstrap p-values and the stepdown adjustment.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::hac::{HacConfig, HacEngine};
use super::{studentize, Studentized};
use crate::dgp::{ar_path, ArSpec};
use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::strategies::StrategyMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapMode {
    /// Resample strategy and benchmark returns jointly; statistics are
    /// centred on the original estimate.
    Returns,
    /// Resample the signals and apply them to the fixed benchmark path;
    /// statistics are not centred.
    Signals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueSide {
    /// Evidence that the strategy beats the benchmark.
    Upper,
    /// Evidence of any difference; compares absolute statistics.
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub mode: BootstrapMode,
    pub block_size: usize,
    pub resamples: usize,
    pub seed: u64,
    pub side: PValueSide,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            mode: BootstrapMode::Signals,
            block_size: 5,
            resamples: 5000,
            seed: 0,
            side: PValueSide::Upper,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self, t: usize) -> Result<()> {
        if self.resamples == 0 {
            return Err(Error::invalid("number of resamples must be at least 1"));
        }
        if self.block_size == 0 || self.block_size > t {
            return Err(Error::invalid(format!(
                "block size {} must lie in 1..={t}",
                self.block_size
            )));
        }
        Ok(())
    }

    fn indices(&self, t: usize, m: usize) -> Vec<usize> {
        block_indices(t, self.block_size, &mut rng::stream(self.seed, m as u64))
    }
}

/// Row indices of one circular block resample: `ceil(T/b)` blocks of `b`
/// consecutive rows with uniform starts, wrapping past the end, cut to `T`.
pub fn block_indices(t: usize, b: usize, g: &mut rng::Rng) -> Vec<usize> {
    let mut out = Vec::with_capacity(t);
    while out.len() < t {
        let start = g.random_range(0..t);
        for k in 0..b.min(t - out.len()) {
            out.push((start + k) % t);
        }
    }
    out
}

/// Resampled copies of `columns`, the same rows for every column, one per
/// resample index.
pub fn circular_block_bootstrap<'a>(
    columns: &'a [Vec<f64>],
    config: &'a BootstrapConfig,
) -> Result<impl Iterator<Item = Vec<Vec<f64>>> + 'a> {
    let t = columns.first().map_or(0, Vec::len);
    config.validate(t)?;
    if columns.iter().any(|c| c.len() != t) {
        return Err(Error::invalid("columns differ in length"));
    }
    Ok((0..config.resamples).map(move |m| {
        let idx = config.indices(t, m);
        columns
            .iter()
            .map(|c| idx.iter().map(|&i| c[i]).collect())
            .collect()
    }))
}

/// Strategy returns obtained by block-resampling the signals (jointly across
/// strategies) and applying them to the unchanged benchmark path.
pub fn signal_bootstrap<'a>(
    benchmark: &'a [f64],
    signals: &'a [Vec<i8>],
    config: &'a BootstrapConfig,
) -> Result<impl Iterator<Item = Vec<Vec<f64>>> + 'a> {
    let t = benchmark.len();
    config.validate(t)?;
    if signals.iter().any(|c| c.len() != t) {
        return Err(Error::invalid("signals not aligned with benchmark"));
    }
    Ok((0..config.resamples).map(move |m| {
        let idx = config.indices(t, m);
        signals
            .iter()
            .map(|s| resampled_signal_returns(benchmark, s, &idx))
            .collect()
    }))
}

fn resampled_signal_returns(benchmark: &[f64], signals: &[i8], idx: &[usize]) -> Vec<f64> {
    idx.iter()
        .zip(benchmark)
        .map(|(&i, &r)| f64::from(signals[i]) * r)
        .collect()
}

/// Borrowed view of what the bootstrap needs from a strategy universe.
pub(crate) struct Panel<'a> {
    pub benchmark: &'a [f64],
    pub returns: Vec<&'a [f64]>,
    pub signals: Option<Vec<&'a [i8]>>,
}

impl<'a> Panel<'a> {
    pub fn from_matrix(matrix: &'a StrategyMatrix) -> Self {
        Self {
            benchmark: &matrix.benchmark,
            returns: matrix.returns.iter().map(Vec::as_slice).collect(),
            signals: Some(matrix.signals.iter().map(Vec::as_slice).collect()),
        }
    }

    fn n_strategies(&self) -> usize {
        self.returns.len()
    }
}

/// Original statistics, comparison values and per-resample comparison values
/// (`resamples x strategies`).
pub(crate) struct BootstrapDraws {
    pub original: Vec<Studentized>,
    pub observed: Vec<f64>,
    pub resampled: Vec<Vec<f64>>,
}

pub(crate) fn bootstrap_draws(
    panel: &Panel<'_>,
    config: &BootstrapConfig,
    engine: &HacEngine,
) -> Result<BootstrapDraws> {
    let t = panel.benchmark.len();
    config.validate(t)?;
    if panel.n_strategies() == 0 {
        return Err(Error::invalid("no strategies to test"));
    }
    let original = par::map_slice(&panel.returns, |r| studentize(engine, r, panel.benchmark))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let observed = original
        .iter()
        .map(|o| match config.side {
            PValueSide::Upper => o.stat,
            PValueSide::TwoSided => o.stat.abs(),
        })
        .collect();
    let signals = match (config.mode, &panel.signals) {
        (BootstrapMode::Signals, None) => {
            return Err(Error::invalid("signal bootstrap needs the signal matrix"))
        }
        (_, s) => s,
    };
    let resampled = par::map_indexed(config.resamples, |m| {
        let idx = config.indices(t, m);
        let mut row = Vec::with_capacity(panel.n_strategies());
        match config.mode {
            BootstrapMode::Signals => {
                let signals = signals.as_ref().expect("checked above");
                for s in signals {
                    let r1 = resampled_signal_returns(panel.benchmark, s, &idx);
                    let st = studentize(engine, &r1, panel.benchmark)?;
                    row.push(match config.side {
                        PValueSide::Upper => st.stat,
                        PValueSide::TwoSided => st.stat.abs(),
                    });
                }
            }
            BootstrapMode::Returns => {
                let r2: Vec<f64> = idx.iter().map(|&i| panel.benchmark[i]).collect();
                for (s, col) in panel.returns.iter().enumerate() {
                    let r1: Vec<f64> = idx.iter().map(|&i| col[i]).collect();
                    let st = studentize(engine, &r1, &r2)?;
                    let gap = (st.diff - original[s].diff).abs();
                    row.push(if st.std_error > 0.0 {
                        gap / st.std_error
                    } else if gap == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    });
                }
            }
        }
        Ok(row)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(BootstrapDraws {
        original,
        observed,
        resampled,
    })
}

/// `(#{m : c*_m >= c} + 1) / (M + 1)` per strategy.
fn pvalues_from_draws(draws: &BootstrapDraws) -> Vec<f64> {
    let m = draws.resampled.len();
    (0..draws.observed.len())
        .map(|s| {
            let c = draws.observed[s];
            let exceed = draws.resampled.iter().filter(|row| row[s] >= c).count();
            (exceed + 1) as f64 / (m + 1) as f64
        })
        .collect()
}

/// P-value of each resample statistic within the pool of all `M` resample
/// statistics plus the observed one:
/// `(#{m' : c*_{m'} >= c*_m} + [c >= c*_m]) / (M + 1)`, per strategy.
pub fn resample_pvalues(observed: &[f64], resampled: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n_strat = observed.len();
    if let Some(row) = resampled.iter().find(|r| r.len() != n_strat) {
        return Err(Error::LengthMismatch {
            expected: n_strat,
            actual: row.len(),
        });
    }
    let m = resampled.len();
    let mut out = vec![vec![0.0; n_strat]; m];
    for s in 0..n_strat {
        let mut sorted: Vec<f64> = resampled.iter().map(|row| row[s]).collect();
        sorted.sort_by(f64::total_cmp);
        for (k, row) in resampled.iter().enumerate() {
            let below = sorted.partition_point(|v| *v < row[s]);
            let at_least = m - below + usize::from(observed[s] >= row[s]);
            out[k][s] = at_least as f64 / (m + 1) as f64;
        }
    }
    Ok(out)
}

/// Stepdown adjustment. Strategies are ordered by increasing p-value (ties
/// by index); for the `j`-th the per-resample minimum of the resample
/// p-values over positions `j..S` is compared with `p_(j)`:
/// `adj_j = max((#{m : min_j^m <= p_(j)} + 1) / (M + 1), adj_{j-1})`.
/// Returned in the original strategy order.
pub fn stepdown_adjust(pvalues: &[f64], resample_pvalues: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = pvalues.len();
    if n == 0 {
        return Err(Error::invalid("no p-values to adjust"));
    }
    if let Some(row) = resample_pvalues.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: row.len(),
        });
    }
    let m = resample_pvalues.len();
    let order = ascending_order(pvalues);
    // suffix minima along the ordered list, per resample
    let mut suffix_min = vec![vec![f64::INFINITY; n + 1]; m];
    for (k, row) in resample_pvalues.iter().enumerate() {
        for j in (0..n).rev() {
            suffix_min[k][j] = suffix_min[k][j + 1].min(row[order[j]]);
        }
    }
    let mut adjusted = vec![0.0; n];
    let mut prev = 0.0f64;
    for (j, &s) in order.iter().enumerate() {
        let below = suffix_min
            .iter()
            .filter(|mins| mins[j] <= pvalues[s])
            .count();
        let adj = ((below + 1) as f64 / (m + 1) as f64).max(prev);
        adjusted[s] = adj;
        prev = adj;
    }
    Ok(adjusted)
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Individual bootstrap p-values of every strategy in the universe.
pub fn individual_pvalues(
    matrix: &StrategyMatrix,
    config: &BootstrapConfig,
    hac: &HacConfig,
) -> Result<Vec<f64>> {
    let engine = HacEngine::new(matrix.n_periods(), hac)?;
    let draws = bootstrap_draws(&Panel::from_matrix(matrix), config, &engine)?;
    Ok(pvalues_from_draws(&draws))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    /// Per-period Sharpe difference against the benchmark.
    pub sharpe_diff: Vec<f64>,
    /// Studentized Sharpe difference.
    pub delta_s: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub adjusted: Vec<f64>,
    /// Strategy indices by increasing individual p-value.
    pub order: Vec<usize>,
}

pub fn significance_report(
    matrix: &StrategyMatrix,
    config: &BootstrapConfig,
    hac: &HacConfig,
) -> Result<SignificanceReport> {
    let engine = HacEngine::new(matrix.n_periods(), hac)?;
    let draws = bootstrap_draws(&Panel::from_matrix(matrix), config, &engine)?;
    let pvalues = pvalues_from_draws(&draws);
    let adjusted = stepdown_adjust(
        &pvalues,
        &resample_pvalues(&draws.observed, &draws.resampled)?,
    )?;
    Ok(SignificanceReport {
        sharpe_diff: draws.original.iter().map(|o| o.diff).collect(),
        delta_s: draws.original.iter().map(|o| o.stat).collect(),
        order: ascending_order(&pvalues),
        pvalues,
        adjusted,
    })
}

/// Settings of the block-size calibration experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCalibration {
    /// Tried in increasing order.
    pub candidates: Vec<usize>,
    /// Length of each simulated series.
    pub length: usize,
    pub resamples: usize,
    pub hac: HacConfig,
    /// Accepted distance between rejection rate and level.
    pub tolerance: f64,
}

impl Default for BlockCalibration {
    fn default() -> Self {
        Self {
            candidates: vec![1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20],
            length: 500,
            resamples: 199,
            hac: HacConfig::default(),
            tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSizeChoice {
    pub block_size: usize,
    /// Rejection rate of every candidate evaluated, in order.
    pub rates: Vec<(usize, f64)>,
}

/// Two-sided bootstrap p-value of one pair of series, returns mode.
pub fn pair_pvalue(
    r1: &[f64],
    r2: &[f64],
    block_size: usize,
    resamples: usize,
    seed: u64,
    engine: &HacEngine,
) -> Result<f64> {
    let panel = Panel {
        benchmark: r2,
        returns: vec![r1],
        signals: None,
    };
    let config = BootstrapConfig {
        mode: BootstrapMode::Returns,
        block_size,
        resamples,
        seed,
        side: PValueSide::TwoSided,
    };
    let draws = bootstrap_draws(&panel, &config, engine)?;
    Ok(pvalues_from_draws(&draws)[0])
}

/// Smallest candidate block size whose null rejection rate at level `alpha`
/// is within the tolerance of `alpha`. Each trial draws two independent
/// realizations of `dgp` (equal Sharpe ratios by construction) and tests
/// their Sharpe difference with the two-sided returns bootstrap.
pub fn select_block_size(
    dgp: &ArSpec,
    alpha: f64,
    trials: usize,
    seed: u64,
    calibration: &BlockCalibration,
) -> Result<BlockSizeChoice> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    if trials == 0 || calibration.candidates.is_empty() {
        return Err(Error::invalid("need at least one trial and one candidate"));
    }
    dgp.validate()?;
    let engine = HacEngine::new(calibration.length, &calibration.hac)?;
    let mut candidates = calibration.candidates.clone();
    candidates.sort_unstable();
    candidates.dedup();
    let mut rates = Vec::new();
    for &b in &candidates {
        let rejections = par::map_indexed(trials, |k| {
            let trial_seed = rng::derive_seed(seed, k as u64);
            let r1 = ar_path(dgp, calibration.length, &mut rng::stream(trial_seed, 0));
            let r2 = ar_path(dgp, calibration.length, &mut rng::stream(trial_seed, 1));
            let boot_seed = rng::derive_seed(trial_seed, b as u64);
            pair_pvalue(&r1, &r2, b, calibration.resamples, boot_seed, &engine).map(|p| p <= alpha)
        })
        .into_iter()
        .collect::<Result<Vec<bool>>>()?;
        let rate = rejections.iter().filter(|r| **r).count() as f64 / trials as f64;
        rates.push((b, rate));
        if (rate - alpha).abs() <= calibration.tolerance {
            return Ok(BlockSizeChoice {
                block_size: b,
                rates,
            });
        }
    }
    Err(Error::Calibration { rates })
}
