//! `--config file.json` support.
//!
//! The file holds the same options as the command line, keyed by long flag
//! name (`-` or `_` both accepted). Top-level keys are global options; an
//! object under the subcommand's name holds that subcommand's options:
//!
//! ```json
//! { "seed": 7, "out_dir": "run1",
//!   "backtest": { "returns": "spx.csv", "cost_bps": 5, "lags": [1, 2] } }
//! ```
//!
//! The file is expanded into flags placed before the ones typed on the
//! command line, so explicit flags win.

use anyhow::{bail, Context, Result};
use serde_json::{Map, Value};

const SUBCOMMANDS: [&str; 6] = [
    "simulate",
    "backtest",
    "significance",
    "factors",
    "bias-demo",
    "select-blocksize",
];

/// Path given with `--config`, if any.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn flag_args(map: &Map<String, Value>, out: &mut Vec<String>) -> Result<()> {
    for (key, value) in map {
        if SUBCOMMANDS.contains(&key.replace('_', "-").as_str()) || key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Result<Vec<String>> = items.iter().map(scalar).collect();
                out.push(flag);
                out.push(parts?.join(","));
            }
            Value::Object(_) => bail!("config key '{key}' must not be an object"),
            v => {
                out.push(flag);
                out.push(scalar(v)?);
            }
        }
    }
    Ok(())
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => bail!("unsupported config value {v}"),
    }
}

/// Expand `--config` into explicit flags. Without `--config` the arguments
/// are returned unchanged.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let Value::Object(root) = value else {
        bail!("config {path} must hold a JSON object");
    };
    let Some(sub_pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        // let clap report the missing subcommand
        return Ok(args);
    };
    let mut global = Vec::new();
    flag_args(&root, &mut global)?;
    let mut sub = Vec::new();
    let name = args[sub_pos].as_str();
    let section = root.get(name).or_else(|| root.get(&name.replace('-', "_")));
    match section {
        Some(Value::Object(m)) => flag_args(m, &mut sub)?,
        Some(_) => bail!("config section '{name}' must be an object"),
        None => {}
    }
    let mut out = Vec::with_capacity(args.len() + global.len() + sub.len());
    out.push(args[0].clone());
    out.extend(global);
    out.extend(args[1..=sub_pos].iter().cloned());
    out.extend(sub);
    out.extend(args[sub_pos + 1..].iter().cloned());
    Ok(out)
}
