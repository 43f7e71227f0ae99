//! Monthly factor regressions (CAPM, three- and four-factor models).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ols;
use crate::series::ReturnSeries;

/// Compound daily returns within each calendar month. Each monthly return is
/// dated on the last observed day of its month.
pub fn monthly_aggregate(daily: &ReturnSeries) -> Result<ReturnSeries> {
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut current: Option<(i32, u32)> = None;
    let mut growth = 1.0;
    let mut last = daily.dates()[0];
    for (&d, &r) in daily.dates().iter().zip(daily.values()) {
        let key = (d.year(), d.month());
        if current.is_some_and(|c| c != key) {
            dates.push(last);
            values.push(growth - 1.0);
            growth = 1.0;
        }
        current = Some(key);
        growth *= 1.0 + r;
        last = d;
    }
    dates.push(last);
    values.push(growth - 1.0);
    ReturnSeries::new(dates, values)
}

fn month_key(d: NaiveDate) -> (i32, u32) {
    (d.year(), d.month())
}

fn last_day_of_month(year: i32, month: u32) -> Option<NaiveDate> {
    let (ny, nm) = if month == 12 {
        (year + 1, 1)
    } else {
        (year, month + 1)
    };
    NaiveDate::from_ymd_opt(ny, nm, 1)?.pred_opt()
}

/// Monthly factor returns as fractions, dated on the last day of each month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorPanel {
    pub dates: Vec<NaiveDate>,
    pub mkt_rf: Vec<f64>,
    pub smb: Vec<f64>,
    pub hml: Vec<f64>,
    pub mom: Option<Vec<f64>>,
    pub rf: Vec<f64>,
}

impl FactorPanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dates.len();
        for (name, col) in [
            ("Mkt-RF", &self.mkt_rf),
            ("SMB", &self.smb),
            ("HML", &self.hml),
            ("RF", &self.rf),
        ] {
            if col.len() != n {
                return Err(Error::invalid(format!(
                    "factor column {name} has {} rows, expected {n}",
                    col.len()
                )));
            }
        }
        if self.mom.as_ref().is_some_and(|m| m.len() != n) {
            return Err(Error::invalid("momentum column length differs"));
        }
        if let Some(i) = self.dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "factor dates not increasing at row {}",
                i + 1
            )));
        }
        Ok(())
    }

    /// Parse the monthly section of a factor file: rows whose first field is
    /// `YYYYMM`, columns found by header name (`Mkt-RF`, `SMB`, `HML`, one of
    /// `MOM`/`Mom`/`UMD`/`WML`, `RF`), values in percent. Preamble, annual
    /// sections and footers are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut columns: Option<BTreeMap<&'static str, usize>> = None;
        let mut panel = FactorPanel {
            dates: Vec::new(),
            mkt_rf: Vec::new(),
            smb: Vec::new(),
            hml: Vec::new(),
            mom: None,
            rf: Vec::new(),
        };
        let mut mom = Vec::new();
        let mut in_monthly = false;
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
            if fields.iter().any(|f| f.eq_ignore_ascii_case("Mkt-RF")) {
                if in_monthly {
                    // a second table (annual factors) starts
                    break;
                }
                columns = Some(header_columns(&fields, line)?);
                continue;
            }
            let Some(cols) = &columns else { continue };
            let first = fields[0];
            if first.len() != 6 || !first.bytes().all(|b| b.is_ascii_digit()) {
                if in_monthly && !first.is_empty() {
                    break;
                }
                continue;
            }
            in_monthly = true;
            let year: i32 = first[..4].parse().expect("digits");
            let month: u32 = first[4..].parse().expect("digits");
            let date = last_day_of_month(year, month).ok_or(Error::Parse {
                line,
                msg: format!("invalid month '{first}'"),
            })?;
            let get = |name: &str| -> Result<f64> {
                let idx = cols[name];
                let cell = fields.get(idx).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("missing {name} column"),
                })?;
                cell.parse::<f64>()
                    .map(|v| v / 100.0)
                    .map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad {name} value '{cell}'"),
                    })
            };
            panel.dates.push(date);
            panel.mkt_rf.push(get("Mkt-RF")?);
            panel.smb.push(get("SMB")?);
            panel.hml.push(get("HML")?);
            panel.rf.push(get("RF")?);
            if cols.contains_key("MOM") {
                mom.push(get("MOM")?);
            }
        }
        let cols = columns.ok_or(Error::Parse {
            line: 0,
            msg: "no header with Mkt-RF found".into(),
        })?;
        if panel.dates.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no monthly rows found".into(),
            });
        }
        if cols.contains_key("MOM") {
            panel.mom = Some(mom);
        }
        panel.validate()?;
        Ok(panel)
    }

    fn find(&self, key: (i32, u32)) -> Option<usize> {
        self.dates
            .binary_search_by(|d| month_key(*d).cmp(&key))
            .ok()
    }
}

fn header_columns(fields: &[&str], line: usize) -> Result<BTreeMap<&'static str, usize>> {
    let mut map = BTreeMap::new();
    for (i, f) in fields.iter().enumerate() {
        let name = match f.to_ascii_uppercase().as_str() {
            "MKT-RF" => "Mkt-RF",
            "SMB" => "SMB",
            "HML" => "HML",
            "RF" => "RF",
            "MOM" | "UMD" | "WML" => "MOM",
            _ => continue,
        };
        map.insert(name, i);
    }
    for required in ["Mkt-RF", "SMB", "HML", "RF"] {
        if !map.contains_key(required) {
            return Err(Error::Parse {
                line,
                msg: format!("header lacks {required}"),
            });
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorModel {
    #[serde(rename = "CAPM")]
    Capm,
    #[serde(rename = "FF3")]
    Ff3,
    #[serde(rename = "FF4")]
    Ff4,
}

impl FactorModel {
    pub const ALL: [FactorModel; 3] = [FactorModel::Capm, FactorModel::Ff3, FactorModel::Ff4];

    pub fn factor_names(self) -> &'static [&'static str] {
        match self {
            FactorModel::Capm => &["MKT"],
            FactorModel::Ff3 => &["MKT", "SMB", "HML"],
            FactorModel::Ff4 => &["MKT", "SMB", "HML", "MOM"],
        }
    }
}

impl fmt::Display for FactorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactorModel::Capm => "CAPM",
            FactorModel::Ff3 => "FF3",
            FactorModel::Ff4 => "FF4",
        })
    }
}

impl FromStr for FactorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CAPM" => Ok(FactorModel::Capm),
            "FF3" => Ok(FactorModel::Ff3),
            "FF4" | "CARHART" => Ok(FactorModel::Ff4),
            _ => Err(Error::invalid(format!("unknown factor model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub model: FactorModel,
    pub months: usize,
    /// Monthly intercept.
    pub alpha: Coefficient,
    pub betas: Vec<Coefficient>,
    pub r_squared: f64,
    pub residual_ss: f64,
}

impl RegressionResult {
    pub fn beta(&self, name: &str) -> Option<&Coefficient> {
        self.betas.iter().find(|b| b.name == name)
    }
}

/// OLS of the strategy's monthly excess return on the model's factors, with
/// intercept and classical standard errors. Months are matched by calendar
/// month.
pub fn factor_regression(
    strategy_monthly: &ReturnSeries,
    panel: &FactorPanel,
    model: FactorModel,
) -> Result<RegressionResult> {
    panel.validate()?;
    if model == FactorModel::Ff4 && panel.mom.is_none() {
        return Err(Error::invalid("four-factor model needs a momentum column"));
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (&d, &r) in strategy_monthly
        .dates()
        .iter()
        .zip(strategy_monthly.values())
    {
        let Some(i) = panel.find(month_key(d)) else {
            continue;
        };
        let mut row = vec![panel.mkt_rf[i]];
        if model != FactorModel::Capm {
            row.push(panel.smb[i]);
            row.push(panel.hml[i]);
        }
        if model == FactorModel::Ff4 {
            row.push(panel.mom.as_ref().expect("checked")[i]);
        }
        rows.push(row);
        y.push(r - panel.rf[i]);
    }
    let k = model.factor_names().len() + 1;
    if rows.is_empty() {
        return Err(Error::InsufficientSamples(
            "strategy and factor dates do not overlap".into(),
        ));
    }
    if rows.len() < k + 1 {
        return Err(Error::InsufficientSamples(format!(
            "{} overlapping months for {k} coefficients",
            rows.len()
        )));
    }
    let fit = ols::fit(&rows, &y)?;
    let coef = |i: usize, name: &str| Coefficient {
        name: name.to_string(),
        estimate: fit.coef[i],
        std_error: fit.std_err[i],
        t_stat: fit.t_stat[i],
    };
    Ok(RegressionResult {
        model,
        months: rows.len(),
        alpha: coef(0, "alpha"),
        betas: model
            .factor_names()
            .iter()
            .enumerate()
            .map(|(i, n)| coef(i + 1, n))
            .collect(),
        r_squared: fit.r_squared,
        residual_ss: fit.residual_ss,
    })
}
