//! Monte Carlo study of average strategy p-values on simulated processes.
//!
//! Each run draws `L + T` returns from the process, runs every model with a
//! rolling window of `L`, and computes the individual bootstrap p-value of
//! each strategy over the `T` forecast periods. P-values are averaged over
//! runs.

use serde::{Deserialize, Serialize};

use crate::dgp::{ar_path, markov_path, ArSpec, TransitionSpec};
use crate::error::{Error, Result};
use crate::inference::{individual_pvalues, BootstrapConfig, HacConfig};
use crate::strategies::{forecast_signals, mean_and_se, ModelKind, StrategyMatrix, StrategySpec};
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StudyDgp {
    Ar(ArSpec),
    Markov(TransitionSpec),
}

impl StudyDgp {
    /// `AR(2)` with `phi_1 = phi_2 = phi` and unit innovations.
    pub fn ar2(phi: f64) -> Result<Self> {
        let spec = ArSpec::new(0.0, vec![phi, phi], 1.0)?;
        if !spec.is_stationary() {
            return Err(Error::Domain(format!(
                "AR(2) with phi = ({phi}, {phi}) is not stationary"
            )));
        }
        Ok(StudyDgp::Ar(spec))
    }

    /// Two-lag binary Markov process with `dp_1 = dp_2 = dp` and unit
    /// innovation scale.
    pub fn markov2(dp: f64) -> Result<Self> {
        Ok(StudyDgp::Markov(TransitionSpec::sign_pattern_two_lag(
            dp, dp, 1.0,
        )?))
    }

    fn path(&self, len: usize, g: &mut rng::Rng) -> Vec<f64> {
        match self {
            StudyDgp::Ar(s) => ar_path(s, len, g),
            StudyDgp::Markov(s) => markov_path(s, len, g),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            StudyDgp::Ar(s) => s.validate(),
            StudyDgp::Markov(s) => s.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub dgp: StudyDgp,
    /// Number of forecast periods `T`.
    pub periods: usize,
    pub window: usize,
    pub lag: usize,
    pub models: Vec<ModelKind>,
    pub runs: usize,
    /// Bootstrap settings; the seed is replaced per run.
    pub bootstrap: BootstrapConfig,
    pub hac: HacConfig,
    pub seed: u64,
}

impl SimulationSetup {
    /// Desk-scale defaults: `T = 500`, `L = 50`, two lags, all models,
    /// 200 runs of 200 signal-bootstrap resamples with blocks of 5.
    pub fn new(dgp: StudyDgp) -> Self {
        Self {
            dgp,
            periods: 500,
            window: 50,
            lag: 2,
            models: ModelKind::ALL.to_vec(),
            runs: 200,
            bootstrap: BootstrapConfig {
                resamples: 200,
                ..BootstrapConfig::default()
            },
            hac: HacConfig::default(),
            seed: 0,
        }
    }

    fn specs(&self) -> Result<Vec<StrategySpec>> {
        self.models
            .iter()
            .map(|&m| StrategySpec::new(m, self.lag, self.window))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.runs == 0 {
            return Err(Error::invalid("need at least one run"));
        }
        if self.models.is_empty() {
            return Err(Error::invalid("no models selected"));
        }
        self.specs()?;
        self.bootstrap.validate(self.periods)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPValue {
    pub model: ModelKind,
    pub mean_p: f64,
    /// Monte Carlo standard error of `mean_p`.
    pub std_error: f64,
    pub runs: usize,
}

/// P-values of every model in one run.
pub fn run_once(setup: &SimulationSetup, run: usize) -> Result<Vec<f64>> {
    let specs = setup.specs()?;
    let run_seed = rng::derive_seed(setup.seed, run as u64);
    let mut g = rng::stream(run_seed, 0);
    let path = setup.dgp.path(setup.window + setup.periods, &mut g);
    let signals = specs
        .iter()
        .map(|s| forecast_signals(&path, s))
        .collect::<Result<Vec<_>>>()?;
    let benchmark = path[setup.window..].to_vec();
    let dates = crate::series::ReturnSeries::undated(benchmark.clone())?
        .dates()
        .to_vec();
    let matrix = StrategyMatrix::from_signals(specs, dates, benchmark, signals)?;
    let config = BootstrapConfig {
        seed: rng::derive_seed(run_seed, 1),
        ..setup.bootstrap
    };
    individual_pvalues(&matrix, &config, &setup.hac)
}

/// Mean individual p-value per model over independent runs.
pub fn run_study(setup: &SimulationSetup) -> Result<Vec<ModelPValue>> {
    setup.validate()?;
    let per_run = par::map_indexed(setup.runs, |r| run_once(setup, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(setup
        .models
        .iter()
        .enumerate()
        .map(|(k, &model)| {
            let ps: Vec<f64> = per_run.iter().map(|p| p[k]).collect();
            let (mean_p, std_error) = mean_and_se(&ps);
            ModelPValue {
                model,
                mean_p,
                std_error,
                runs: setup.runs,
            }
        })
        .collect())
}
