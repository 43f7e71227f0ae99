//! CSV and JSON artifacts.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! file read back through the matching reader reproduces the exact values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::ReturnSeries;
use crate::strategies::{StrategyMatrix, StrategySpec};

const DATE_FORMAT: &str = "%Y-%m-%d";

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, DATE_FORMAT)
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y%m%d"))
        .map_err(|_| Error::Parse {
            line,
            msg: format!("bad date '{s}'"),
        })
}

fn parse_number<T: std::str::FromStr>(s: &str, line: usize, column: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value '{s}' in column {column}"),
    })
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::UnequalLengths { .. } | csv::ErrorKind::Utf8 { .. } => Error::Parse {
            line,
            msg: e.to_string(),
        },
        _ => Error::Csv(e),
    }
}

fn check_increasing(dates: &[NaiveDate], lines: &[usize]) -> Result<()> {
    if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Parse {
            line: lines[i + 1],
            msg: format!("date {} does not follow {}", dates[i + 1], dates[i]),
        });
    }
    Ok(())
}

/// Read a `date,return` file (header required, simple returns as fractions).
pub fn read_returns<R: Read>(r: R) -> Result<ReturnSeries> {
    let mut rdr = reader(r);
    let (mut dates, mut values, mut lines) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec);
        if rec.len() < 2 {
            return Err(Error::Parse {
                line,
                msg: "expected date and return".into(),
            });
        }
        dates.push(parse_date(&rec[0], line)?);
        let v: f64 = parse_number(&rec[1], line, "return")?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                msg: format!("non-finite return '{}'", &rec[1]),
            });
        }
        values.push(v);
        lines.push(line);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no data rows".into(),
        });
    }
    check_increasing(&dates, &lines)?;
    ReturnSeries::new(dates, values)
}

pub fn read_returns_file(path: impl AsRef<Path>) -> Result<ReturnSeries> {
    read_returns(BufReader::new(File::open(path)?))
}

pub fn write_returns<W: Write>(series: &ReturnSeries, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["date", "return"])?;
    for (d, v) in series.dates().iter().zip(series.values()) {
        wtr.write_record([d.format(DATE_FORMAT).to_string(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Dated numeric columns with named headers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        for col in &self.columns {
            if col.len() != self.dates.len() {
                return Err(Error::LengthMismatch {
                    expected: self.dates.len(),
                    actual: col.len(),
                });
            }
        }
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["date".to_string()];
        header.extend(self.headers.iter().cloned());
        wtr.write_record(&header)?;
        for (i, d) in self.dates.iter().enumerate() {
            let mut row = vec![d.format(DATE_FORMAT).to_string()];
            row.extend(self.columns.iter().map(|c| c[i].to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rdr = reader(r);
        let header = rdr.headers().map_err(csv_error)?.clone();
        if header.is_empty() {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header".into(),
            });
        }
        let headers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut columns = vec![Vec::new(); headers.len()];
        let (mut dates, mut lines) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let line = record_line(&rec);
            dates.push(parse_date(&rec[0], line)?);
            for (c, col) in columns.iter_mut().enumerate() {
                col.push(parse_number(&rec[c + 1], line, &headers[c])?);
            }
            lines.push(line);
        }
        check_increasing(&dates, &lines)?;
        Ok(Self {
            headers,
            dates,
            columns,
        })
    }
}

/// Gross strategy returns with one column per strategy label and the
/// benchmark last.
pub fn returns_table(matrix: &StrategyMatrix) -> Table {
    let mut headers: Vec<String> = matrix.specs.iter().map(StrategySpec::label).collect();
    headers.push("benchmark".into());
    let mut columns = matrix.returns.clone();
    columns.push(matrix.benchmark.clone());
    Table {
        headers,
        dates: matrix.dates.clone(),
        columns,
    }
}

/// Write the signal matrix: `date`, one `{model}/{lag}/{window}` column of
/// `+1`/`-1` per strategy, then the benchmark returns. This file alone
/// rebuilds the whole universe.
pub fn write_signals<W: Write>(matrix: &StrategyMatrix, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(matrix.specs.iter().map(StrategySpec::label));
    header.push("benchmark".into());
    wtr.write_record(&header)?;
    for (i, d) in matrix.dates.iter().enumerate() {
        let mut row = vec![d.format(DATE_FORMAT).to_string()];
        row.extend(matrix.signals.iter().map(|s| s[i].to_string()));
        row.push(matrix.benchmark[i].to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_signals<R: Read>(r: R) -> Result<StrategyMatrix> {
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let n = header.len();
    if n < 3 || &header[n - 1] != "benchmark" {
        return Err(Error::Parse {
            line: 1,
            msg: "expected date, strategy columns and a final benchmark column".into(),
        });
    }
    let specs = header
        .iter()
        .skip(1)
        .take(n - 2)
        .map(|h| {
            h.parse::<StrategySpec>().map_err(|e| Error::Parse {
                line: 1,
                msg: format!("column '{h}': {e}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut signals = vec![Vec::new(); specs.len()];
    let (mut dates, mut benchmark, mut lines) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec);
        dates.push(parse_date(&rec[0], line)?);
        for (s, col) in signals.iter_mut().enumerate() {
            let v: i8 = parse_number(&rec[s + 1], line, &header[s + 1])?;
            if v != 1 && v != -1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("signal {v} is not +1 or -1"),
                });
            }
            col.push(v);
        }
        benchmark.push(parse_number(&rec[n - 1], line, "benchmark")?);
        lines.push(line);
    }
    check_increasing(&dates, &lines)?;
    StrategyMatrix::from_signals(specs, dates, benchmark, signals)
}

pub fn read_signals_file(path: impl AsRef<Path>) -> Result<StrategyMatrix> {
    read_signals(BufReader::new(File::open(path)?))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
