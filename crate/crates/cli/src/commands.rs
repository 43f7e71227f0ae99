use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use signtree_core::bias::{bias_curve, enumerate_bias_t2, BiasResult};
use signtree_core::dgp::{self, ArSpec, TransitionSpec};
use signtree_core::factors::{
    factor_regression, monthly_aggregate, FactorModel, FactorPanel, RegressionResult,
};
use signtree_core::inference::{
    select_block_size, significance_report, BlockCalibration, BlockSizeChoice, BootstrapConfig,
    BootstrapMode, HacConfig, PValueSide,
};
use signtree_core::io::{self, Table};
use signtree_core::series::{
    empirical_sign_transitions, state_label, summarize, wealth_curve, PerformanceSummary,
};
use signtree_core::strategies::{
    build_universe, search_technology, GridSpec, ModelKind, StrategyMatrix, WindowRange,
};
use signtree_core::study::{run_study, SimulationSetup, StudyDgp};
use signtree_core::{par, rng, Error, ReturnSeries, SignalSeries};

use crate::{
    BacktestArgs, BiasArgs, BlockArgs, Cli, Command, DgpKind, FactorsArgs, Mode, Side,
    SignificanceArgs, SimulateArgs, Sweep,
};

pub fn run(cli: Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let out = cli.out_dir.as_path();
    let seed = cli.seed;
    par::with_threads(cli.threads, || match &cli.command {
        Command::Simulate(a) => simulate(a, seed, out),
        Command::Backtest(a) => backtest(a, out),
        Command::Significance(a) => significance(a, seed, out),
        Command::Factors(a) => factors(a, out),
        Command::BiasDemo(a) => bias_demo(a, seed, out),
        Command::SelectBlocksize(a) => select_blocksize(a, seed, out),
    })
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = out.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    eprintln!("writing {}", path.display());
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<()> {
    let path = out.join(name);
    eprintln!("writing {}", path.display());
    io::write_json(&path, value).with_context(|| format!("writing {}", path.display()))
}

fn models_or_all(models: &[ModelKind]) -> Vec<ModelKind> {
    if models.is_empty() {
        ModelKind::ALL.to_vec()
    } else {
        models.to_vec()
    }
}

fn count(v: f64, what: &str) -> Result<usize> {
    ensure!(
        v >= 1.0 && v.fract() == 0.0 && v < 1e9,
        "sweep value {v} is not a valid {what}"
    );
    Ok(v as usize)
}

fn study_dgp(kind: DgpKind, param: f64) -> Result<StudyDgp> {
    Ok(match kind {
        DgpKind::Ar2 => StudyDgp::ar2(param)?,
        DgpKind::Markov2 => StudyDgp::markov2(param)?,
    })
}

fn simulate(a: &SimulateArgs, seed: u64, out: &Path) -> Result<()> {
    ensure!(!a.values.is_empty(), "sweep needs at least one value");
    let models = models_or_all(&a.models);
    let sweep = match a.sweep {
        Sweep::Param => "param",
        Sweep::Periods => "periods",
        Sweep::Window => "window",
    };
    let dgp_name = match a.dgp {
        DgpKind::Ar2 => "ar2",
        DgpKind::Markov2 => "markov2",
    };

    if let Some(len) = a.emit_returns {
        let param = match a.sweep {
            Sweep::Param => a.values[0],
            _ => a.param,
        };
        let series = match a.dgp {
            DgpKind::Ar2 => {
                study_dgp(a.dgp, param)?;
                dgp::simulate_ar(&ArSpec::new(0.0, vec![param, param], a.sigma)?, len, seed)?
            }
            DgpKind::Markov2 => {
                let spec = TransitionSpec::sign_pattern_two_lag(param, param, a.sigma)?;
                dgp::simulate_markov(&spec, len, seed)?
            }
        };
        let mut w = create(out, "returns.csv")?;
        io::write_returns(&series, &mut w)?;
        w.flush()?;
    }

    let mut w = create(out, "simulate.csv")?;
    writeln!(w, "dgp,sweep,value,model,mean_p,std_error,runs")?;
    println!("{:>8} {:>8} {:>8} {:>8}", "value", "model", "mean_p", "se");
    for (i, &v) in a.values.iter().enumerate() {
        let (param, periods, window) = match a.sweep {
            Sweep::Param => (v, a.periods, a.window),
            Sweep::Periods => (a.param, count(v, "period count")?, a.window),
            Sweep::Window => (a.param, a.periods, count(v, "window length")?),
        };
        let mut setup = SimulationSetup::new(study_dgp(a.dgp, param)?);
        setup.periods = periods;
        setup.window = window;
        setup.lag = a.lag;
        setup.models = models.clone();
        setup.runs = a.runs;
        setup.bootstrap.resamples = a.resamples;
        setup.bootstrap.block_size = a.block_size;
        setup.seed = rng::derive_seed(seed, i as u64);
        setup.validate()?;
        for r in run_study(&setup)? {
            writeln!(
                w,
                "{dgp_name},{sweep},{v},{},{},{},{}",
                r.model, r.mean_p, r.std_error, r.runs
            )?;
            println!(
                "{v:>8} {:>8} {:>8.4} {:>8.4}",
                r.model.label(),
                r.mean_p,
                r.std_error
            );
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StrategyEntry {
    label: String,
    model: ModelKind,
    lag: usize,
    window: usize,
    summary: Option<PerformanceSummary>,
}

#[derive(Serialize)]
struct BacktestSummary {
    cost_bps_per_side: f64,
    periods: usize,
    start: String,
    end: String,
    benchmark: Option<PerformanceSummary>,
    search: Option<PerformanceSummary>,
    strategies: Vec<StrategyEntry>,
}

#[derive(Serialize)]
struct StateRow {
    state: String,
    visits: u64,
    ups: u64,
    prob_up: Option<f64>,
}

#[derive(Serialize)]
struct TransitionEntry {
    lag: usize,
    states: Vec<StateRow>,
}

/// Zero-variance returns have no summary.
fn optional_summary(
    strategy: &ReturnSeries,
    signals: &SignalSeries,
    bench: &ReturnSeries,
) -> Result<Option<PerformanceSummary>> {
    match summarize(strategy, signals, bench) {
        Ok(s) => Ok(Some(s)),
        Err(Error::ZeroVariance(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn backtest(a: &BacktestArgs, out: &Path) -> Result<()> {
    ensure!(
        a.cost_bps.is_finite() && a.cost_bps >= 0.0,
        "cost must be a non-negative number of basis points"
    );
    let returns = io::read_returns_file(&a.returns)
        .with_context(|| format!("reading {}", a.returns.display()))?;
    let grid = GridSpec {
        models: models_or_all(&a.grid.models),
        lags: a.grid.lags.clone(),
        windows: WindowRange {
            start: a.grid.window_start,
            stop: a.grid.window_stop,
            step: a.grid.window_step,
        },
    };
    if !a.grid.unsafe_grid && !grid.within_default_bounds() {
        bail!("grid leaves the default bounds (lags 1-4, windows 10-500); pass --unsafe-grid to allow it");
    }
    let specs = grid.specs()?;
    let matrix = build_universe(&returns, &specs)?;
    let cost = a.cost_bps * 1e-4;
    let n = matrix.n_periods();

    let mut w = create(out, "signals.csv")?;
    io::write_signals(&matrix, &mut w)?;
    w.flush()?;

    let bench = matrix.benchmark_series()?;
    let search = search_technology(&matrix, 2.0 * cost)?;
    let search_series = bench.with_values(search.returns.clone())?;
    let summaries = matrix.summaries(cost)?;
    let report = BacktestSummary {
        cost_bps_per_side: a.cost_bps,
        periods: n,
        start: matrix.dates[0].to_string(),
        end: matrix.dates[n - 1].to_string(),
        benchmark: optional_summary(&bench, &SignalSeries::all_long(n), &bench)?,
        search: optional_summary(&search_series, &search.signals, &bench)?,
        strategies: matrix
            .specs
            .iter()
            .zip(&summaries)
            .map(|(s, summary)| StrategyEntry {
                label: s.label(),
                model: s.model,
                lag: s.lag,
                window: s.window,
                summary: *summary,
            })
            .collect(),
    };
    write_json(out, "summaries.json", &report)?;

    let net: Vec<Vec<f64>> = (0..matrix.n_strategies())
        .map(|s| matrix.net_column(s, cost))
        .collect();
    let mut headers: Vec<String> = matrix.specs.iter().map(|s| s.label()).collect();
    headers.extend(["search".to_string(), "benchmark".to_string()]);
    let mut columns = net.clone();
    columns.extend([search.returns.clone(), matrix.benchmark.clone()]);
    let mut w = create(out, "net_returns.csv")?;
    Table {
        headers,
        dates: matrix.dates.clone(),
        columns,
    }
    .write(&mut w)?;
    w.flush()?;

    // best net Sharpe first, strategies without a summary last
    let mut ranked: Vec<usize> = (0..matrix.n_strategies()).collect();
    let sharpe = |s: usize| summaries[s].map_or(f64::NEG_INFINITY, |x| x.annual_sharpe);
    ranked.sort_by(|&x, &y| sharpe(y).total_cmp(&sharpe(x)).then(x.cmp(&y)));
    ranked.truncate(a.top);
    let mut headers: Vec<String> = ranked.iter().map(|&s| matrix.specs[s].label()).collect();
    headers.extend(["search".to_string(), "benchmark".to_string()]);
    let mut columns: Vec<Vec<f64>> = ranked.iter().map(|&s| wealth_curve(&net[s])).collect();
    columns.extend([
        wealth_curve(&search.returns),
        wealth_curve(&matrix.benchmark),
    ]);
    let mut w = create(out, "wealth.csv")?;
    Table {
        headers,
        dates: matrix.dates.clone(),
        columns,
    }
    .write(&mut w)?;
    w.flush()?;

    let mut transitions = Vec::new();
    for lag in 1..=4 {
        let Ok(table) = empirical_sign_transitions(returns.values(), lag) else {
            break;
        };
        let states = (0..table.visits.len())
            .map(|s| StateRow {
                state: state_label(s, lag),
                visits: table.visits[s],
                ups: table.ups[s],
                prob_up: table.prob_up(s),
            })
            .collect();
        transitions.push(TransitionEntry { lag, states });
    }
    write_json(out, "transitions.json", &transitions)?;

    println!(
        "{} strategies over {} periods ({} to {}), {} bps per side",
        matrix.n_strategies(),
        n,
        report.start,
        report.end,
        a.cost_bps
    );
    println!(
        "{:>12} {:>9} {:>8} {:>9} {:>8} {:>8}",
        "strategy", "return", "sharpe", "drawdown", "trips", "BE bps"
    );
    let rows = ranked
        .iter()
        .map(|&s| (matrix.specs[s].label(), summaries[s]))
        .chain([
            ("search".to_string(), report.search),
            ("benchmark".to_string(), report.benchmark),
        ]);
    for (label, s) in rows {
        match s {
            Some(s) => println!(
                "{label:>12} {:>8.2}% {:>8.2} {:>8.2}% {:>8.1} {:>8.1}",
                100.0 * s.annual_return,
                s.annual_sharpe,
                100.0 * s.max_drawdown,
                s.round_trips,
                1e4 * s.break_even_cost
            ),
            None => println!("{label:>12} {:>9}", "n/a"),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SignificanceRow {
    label: String,
    sharpe_diff: f64,
    delta_s: f64,
    p_value: f64,
    adjusted_p: f64,
}

#[derive(Serialize)]
struct SignificanceOutput {
    bootstrap: BootstrapConfig,
    hac: HacConfig,
    periods: usize,
    strategies: Vec<SignificanceRow>,
    /// Strategy indices by increasing p-value.
    order: Vec<usize>,
}

fn significance(a: &SignificanceArgs, seed: u64, out: &Path) -> Result<()> {
    let matrix: StrategyMatrix = io::read_signals_file(&a.signals)
        .with_context(|| format!("reading {}", a.signals.display()))?;
    let config = BootstrapConfig {
        mode: match a.mode {
            Mode::Signals => BootstrapMode::Signals,
            Mode::Returns => BootstrapMode::Returns,
        },
        block_size: a.block_size,
        resamples: a.resamples,
        seed,
        side: match a.side {
            Side::Upper => PValueSide::Upper,
            Side::TwoSided => PValueSide::TwoSided,
        },
    };
    let hac = HacConfig::fixed(a.bandwidth);
    let rep = significance_report(&matrix, &config, &hac)?;

    let mut w = create(out, "pvalue_grid.csv")?;
    writeln!(w, "model,lag,window,sharpe_diff,delta_s,p_value,adjusted_p")?;
    for (s, spec) in matrix.specs.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            spec.model,
            spec.lag,
            spec.window,
            rep.sharpe_diff[s],
            rep.delta_s[s],
            rep.pvalues[s],
            rep.adjusted[s]
        )?;
    }
    w.flush()?;

    let output = SignificanceOutput {
        bootstrap: config,
        hac,
        periods: matrix.n_periods(),
        strategies: matrix
            .specs
            .iter()
            .enumerate()
            .map(|(s, spec)| SignificanceRow {
                label: spec.label(),
                sharpe_diff: rep.sharpe_diff[s],
                delta_s: rep.delta_s[s],
                p_value: rep.pvalues[s],
                adjusted_p: rep.adjusted[s],
            })
            .collect(),
        order: rep.order.clone(),
    };
    write_json(out, "significance.json", &output)?;

    println!(
        "{:>12} {:>8} {:>8} {:>8}",
        "strategy", "delta_s", "p", "adj p"
    );
    for &s in rep.order.iter().take(a.top) {
        println!(
            "{:>12} {:>8.3} {:>8.4} {:>8.4}",
            matrix.specs[s].label(),
            rep.delta_s[s],
            rep.pvalues[s],
            rep.adjusted[s]
        );
    }
    Ok(())
}

fn factors(a: &FactorsArgs, out: &Path) -> Result<()> {
    let series = match &a.column {
        None => io::read_returns_file(&a.returns)?,
        Some(name) => {
            let file = File::open(&a.returns)
                .with_context(|| format!("opening {}", a.returns.display()))?;
            let table = Table::read(file)?;
            let Some(col) = table.column(name) else {
                bail!("no column '{name}' in {}", a.returns.display());
            };
            ReturnSeries::new(table.dates.clone(), col.to_vec())?
        }
    };
    let monthly = monthly_aggregate(&series)?;
    let text = std::fs::read_to_string(&a.factors)
        .with_context(|| format!("reading {}", a.factors.display()))?;
    let panel = FactorPanel::parse_csv(&text)?;
    let models = if a.models.is_empty() {
        FactorModel::ALL
            .into_iter()
            .filter(|m| *m != FactorModel::Ff4 || panel.mom.is_some())
            .collect()
    } else {
        a.models.clone()
    };

    let mut results: Vec<RegressionResult> = Vec::new();
    for &m in &models {
        let r = factor_regression(&monthly, &panel, m)
            .with_context(|| format!("{m}: strategy and factor dates do not overlap enough"))?;
        ensure!(
            r.months >= a.min_months,
            "only {} overlapping months, need at least {}",
            r.months,
            a.min_months
        );
        results.push(r);
    }
    write_json(out, "factors.json", &results)?;

    print!("{:>8}", "");
    for r in &results {
        print!(" {:>18}", r.model.to_string());
    }
    println!();
    let mut names = vec!["alpha"];
    for r in &results {
        for b in &r.betas {
            if !names.contains(&b.name.as_str()) {
                names.push(&b.name);
            }
        }
    }
    for name in names {
        print!("{name:>8}");
        for r in &results {
            let c = if name == "alpha" {
                Some(&r.alpha)
            } else {
                r.beta(name)
            };
            match c {
                Some(c) => print!(" {:>9.4} ({:>6.2})", c.estimate, c.t_stat),
                None => print!(" {:>18}", ""),
            }
        }
        println!();
    }
    print!("{:>8}", "R2");
    for r in &results {
        print!(" {:>18.4}", r.r_squared);
    }
    println!();
    print!("{:>8}", "months");
    for r in &results {
        print!(" {:>18}", r.months);
    }
    println!();
    Ok(())
}

#[derive(Serialize)]
struct Enumeration {
    t: usize,
    probabilities: BiasResult,
    p_value: f64,
}

fn bias_demo(a: &BiasArgs, seed: u64, out: &Path) -> Result<()> {
    let curve = bias_curve(&a.lengths, a.trials, seed)?;
    let exact = enumerate_bias_t2();
    write_json(
        out,
        "bias_enumeration.json",
        &Enumeration {
            t: 2,
            probabilities: exact,
            p_value: exact.p_value(),
        },
    )?;
    let mut w = create(out, "bias_curve.csv")?;
    writeln!(w, "t,trials,p_value,std_error,p_pos,p_zero,p_neg")?;
    for e in &curve {
        let p = e.probabilities;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            e.t, e.trials, e.p_value, e.std_error, p.p_pos, p.p_zero, p.p_neg
        )?;
    }
    w.flush()?;

    println!(
        "exact T=2: P(>0) = {}, P(=0) = {}, P(<0) = {}, p = {}",
        exact.p_pos,
        exact.p_zero,
        exact.p_neg,
        exact.p_value()
    );
    println!("{:>6} {:>8} {:>8}", "T", "p", "se");
    for e in &curve {
        println!("{:>6} {:>8.4} {:>8.4}", e.t, e.p_value, e.std_error);
    }
    Ok(())
}

#[derive(Serialize)]
struct BlockOutput {
    dgp: ArSpec,
    alpha: f64,
    trials: usize,
    calibration: BlockCalibration,
    choice: BlockSizeChoice,
}

fn select_blocksize(a: &BlockArgs, seed: u64, out: &Path) -> Result<()> {
    let dgp = if a.phi.is_empty() {
        ArSpec::white_noise(a.sigma)
    } else {
        ArSpec::new(0.0, a.phi.clone(), a.sigma)?
    };
    let calibration = BlockCalibration {
        candidates: a.candidates.clone(),
        length: a.length,
        resamples: a.resamples,
        hac: HacConfig::fixed(a.bandwidth),
        tolerance: a.tolerance,
    };
    let choice = select_block_size(&dgp, a.alpha, a.trials, seed, &calibration)?;
    for (b, rate) in &choice.rates {
        println!("block {b:>3}: rejection rate {rate:.4}");
    }
    println!("selected block size {}", choice.block_size);
    write_json(
        out,
        "blocksize.json",
        &BlockOutput {
            dgp,
            alpha: a.alpha,
            trials: a.trials,
            calibration,
            choice,
        },
    )
}
