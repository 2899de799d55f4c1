//! Paired observation files and moment estimation from them.
//!
//! Accepted headers are `X,Y,x,y` (true and observed values) or `x,y`
//! (observed only).

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::PopulationParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedRow {
    pub true_x: Option<f64>,
    pub true_y: Option<f64>,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedDataset {
    pub rows: Vec<PairedRow>,
    pub has_truth: bool,
}

impl PairedDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Divisor {
    #[serde(rename = "n")]
    N,
    #[default]
    #[serde(rename = "n-1")]
    NMinus1,
}

impl FromStr for Divisor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "n" => Ok(Divisor::N),
            "n-1" => Ok(Divisor::NMinus1),
            other => Err(Error::Format(format!("unknown divisor `{other}` (expected n or n-1)"))),
        }
    }
}

impl std::fmt::Display for Divisor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Divisor::N => "n",
            Divisor::NMinus1 => "n-1",
        })
    }
}

pub fn read_dataset<R: Read>(reader: R) -> Result<PairedDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Format(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    let has_truth = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["X", "Y", "x", "y"] => true,
        ["x", "y"] => false,
        _ => {
            return Err(Error::Format(format!(
                "unrecognized header `{}` (expected `X,Y,x,y` or `x,y`)",
                header.join(",")
            )))
        }
    };

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Format(format!("row {line}: {e}")))?;
        let cell = |col: usize| -> Result<f64> {
            let text = record.get(col).unwrap_or("");
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Format(format!(
                    "row {line}, column `{}`: `{text}` is not a finite number",
                    header[col]
                ))),
            }
        };
        rows.push(if has_truth {
            PairedRow { true_x: Some(cell(0)?), true_y: Some(cell(1)?), x: cell(2)?, y: cell(3)? }
        } else {
            PairedRow { true_x: None, true_y: None, x: cell(0)?, y: cell(1)? }
        });
    }
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 data rows, found {}",
            rows.len()
        )));
    }
    Ok(PairedDataset { rows, has_truth })
}

pub fn load_dataset(path: &Path) -> Result<PairedDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_dataset(file)
}

/// Writes a dataset with shortest round-tripping float formatting.
pub fn write_dataset<W: Write>(data: &PairedDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    if data.has_truth {
        w.write_record(["X", "Y", "x", "y"]).map_err(io)?;
    } else {
        w.write_record(["x", "y"]).map_err(io)?;
    }
    for row in &data.rows {
        let mut fields = Vec::with_capacity(4);
        if data.has_truth {
            fields.push(row.true_x.unwrap_or(f64::NAN).to_string());
            fields.push(row.true_y.unwrap_or(f64::NAN).to_string());
        }
        fields.push(row.x.to_string());
        fields.push(row.y.to_string());
        w.write_record(&fields).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn comoment(a: &[f64], b: &[f64], denom: f64) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / denom
}

/// Estimates population parameters from data carrying true values. The
/// measurement-error variances are the variances of `y - Y` and `x - X`.
pub fn estimate_params(data: &PairedDataset, divisor: Divisor) -> Result<PopulationParams> {
    if !data.has_truth {
        return Err(Error::InsufficientData(
            "measurement-error variances need true values (header X,Y,x,y); \
             supply a parameter file with --params instead"
                .into(),
        ));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 rows, found {n}")));
    }
    let denom = match divisor {
        Divisor::N => n as f64,
        Divisor::NMinus1 => (n - 1) as f64,
    };
    let big_x: Vec<f64> = data.rows.iter().map(|r| r.true_x.unwrap_or(f64::NAN)).collect();
    let big_y: Vec<f64> = data.rows.iter().map(|r| r.true_y.unwrap_or(f64::NAN)).collect();
    let u: Vec<f64> = data.rows.iter().zip(&big_y).map(|(r, t)| r.y - t).collect();
    let v: Vec<f64> = data.rows.iter().zip(&big_x).map(|(r, t)| r.x - t).collect();

    let sigma2_x = comoment(&big_x, &big_x, denom);
    let sigma2_y = comoment(&big_y, &big_y, denom);
    let rho = comoment(&big_x, &big_y, denom) / (sigma2_x * sigma2_y).sqrt();
    PopulationParams::new(
        mean(&big_y),
        mean(&big_x),
        sigma2_y,
        sigma2_x,
        rho.clamp(-1.0, 1.0),
        comoment(&u, &u, denom),
        comoment(&v, &v, denom),
        n as u64,
    )
}
