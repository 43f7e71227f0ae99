//! Sign-pattern forecasting with decision trees and the statistics needed to
//! decide whether such forecasts beat buy-and-hold.
//!
//! The crate is organised around the pipeline:
//!
//! * [`dgp`] simulates autoregressive and binary-Markov return processes and
//!   carries the closed-form results about them;
//! * [`trees`] fits CART and fixed sign-trees;
//! * [`strategies`] turns forecasters into rolling-window trading strategies
//!   and assembles strategy universes;
//! * [`inference`] computes HAC-studentized Sharpe differences, block
//!   bootstraps and stepdown-adjusted p-values;
//! * [`series`] and [`factors`] hold return containers, performance metrics and
//!   factor regressions;
//! * [`bias`] and [`study`] reproduce the p-value bias example and the
//!   simulation study.
//!
//! Heavy loops run on rayon when the default `parallel` feature is enabled.
//! Every stochastic routine derives one RNG stream per work unit from an
//! explicit seed, so results do not depend on the number of threads.

pub mod bias;
pub mod dgp;
pub mod error;
pub mod factors;
pub mod inference;
pub mod io;
pub mod ols;
pub mod par;
pub mod rng;
pub mod series;
pub mod strategies;
pub mod study;
pub mod trees;

pub use error::{Error, Result};
pub use series::{ReturnSeries, SignalSeries};
