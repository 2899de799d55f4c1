//! MSE/PRE comparison tables in csv, json and text form.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::dataset::Divisor;
use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::moments::PopulationParams;
use crate::theory::{analyze_all, tp_errata, MseBreakdown, TpErrata, TpMode};

/// Relative tolerance for reproducing published table values.
pub const TABLE_RELATIVE_TOLERANCE: f64 = 2.5e-3;
/// Relative tolerance for internal algebraic identities.
pub const IDENTITY_RELATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub table_relative: f64,
    pub identity_relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            table_relative: TABLE_RELATIVE_TOLERANCE,
            identity_relative: IDENTITY_RELATIVE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub params: Option<PopulationParams>,
    pub tp_mode: TpMode,
    /// Set when parameters were estimated from data.
    pub divisor: Option<Divisor>,
    pub tolerances: Tolerances,
    pub tp_errata: Option<TpErrata>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportTable {
    pub rows: Vec<MseBreakdown>,
    pub metadata: ReportMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Csv,
    Json,
    #[default]
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::Format(format!("unknown format `{other}` (expected csv, json or text)"))),
        }
    }
}

pub fn build_report(params: &PopulationParams, mode: TpMode, divisor: Option<Divisor>) -> Result<ReportTable> {
    Ok(ReportTable {
        rows: analyze_all(params, mode)?,
        metadata: ReportMetadata {
            params: Some(*params),
            tp_mode: mode,
            divisor,
            tolerances: Tolerances::default(),
            tp_errata: Some(tp_errata(params)?),
        },
    })
}

fn pre_cell(pre: Option<f64>) -> String {
    pre.map_or_else(|| "NA".to_owned(), |p| format!("{p:.3}"))
}

pub fn render_csv(table: &ReportTable) -> String {
    let mut out = String::from("estimator,mse_error_free,me_contribution,mse_total,pre\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{:.3},{:.3},{:.3},{}",
            r.estimator,
            r.mse_error_free,
            r.me_contribution,
            r.mse_total,
            pre_cell(r.pre)
        );
    }
    out
}

pub fn render_json(table: &ReportTable) -> String {
    let mut s = serde_json::to_string_pretty(table).expect("report serializes");
    s.push('\n');
    s
}

fn label(id: EstimatorId) -> &'static str {
    match id {
        EstimatorId::Mean => "ybar",
        other => other.as_str(),
    }
}

pub fn render_text(table: &ReportTable) -> String {
    let headers = ["estimator", "mse w/o meas. error", "meas. error contribution", "mse with meas. error", "pre"];
    let body: Vec<[String; 5]> = table
        .rows
        .iter()
        .map(|r| {
            [
                label(r.estimator).to_owned(),
                format!("{:.3}", r.mse_error_free),
                format!("{:.3}", r.me_contribution),
                format!("{:.3}", r.mse_total),
                pre_cell(r.pre),
            ]
        })
        .collect();
    let mut widths = headers.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let line = |cells: &[&str]| {
        let mut s = format!("{:<w$}", cells[0], w = widths[0]);
        for (cell, w) in cells[1..].iter().zip(&widths[1..]) {
            let _ = write!(s, "  {cell:>w$}");
        }
        s.push('\n');
        s
    };
    out.push_str(&line(&headers));
    out.push_str(&line(&widths.map(|w| "-".repeat(w)).iter().map(String::as_str).collect::<Vec<_>>()));
    for row in &body {
        out.push_str(&line(&row.iter().map(String::as_str).collect::<Vec<_>>()));
    }

    let meta = &table.metadata;
    if let Some(p) = &meta.params {
        let _ = writeln!(
            out,
            "\nparameters: mu_y={} mu_x={} sigma2_y={} sigma2_x={} rho={} sigma2_u={} sigma2_v={} n={}",
            p.mu_y, p.mu_x, p.sigma2_y, p.sigma2_x, p.rho, p.sigma2_u, p.sigma2_v, p.n
        );
        let _ = writeln!(out, "tp mode: {}", meta.tp_mode);
        if let Some(d) = meta.divisor {
            let _ = writeln!(out, "variance divisor: {d}");
        }
    }
    if let Some(e) = meta.tp_errata.as_ref().filter(|e| e.disagrees()) {
        out.push_str(&errata_footnote(e));
    }
    out
}

/// Explains why the published tp minimum is not reproduced.
pub fn errata_footnote(e: &TpErrata) -> String {
    let mut s = String::from("\nnote (tp):\n");
    let _ = writeln!(s, "  published minimum mse:            {:.3}", e.printed_min_mse);
    let _ = writeln!(
        s,
        "  corrected quadratic minimum:      {:.3} at weights ({:.6}, {:.6}); same as t4",
        e.corrected.min_mse, e.corrected.weights.w1, e.corrected.weights.w2
    );
    let _ = writeln!(
        s,
        "  as-printed quadratic stationary:  {:.3} at weights ({:.6}, {:.6}); hessian_pd={}, admissible={}",
        e.as_printed.min_mse,
        e.as_printed.weights.w1,
        e.as_printed.weights.w2,
        e.as_printed.hessian_pd,
        e.as_printed.admissible
    );
    let _ = writeln!(
        s,
        "  published weights:                ({:.6}, {:.6})",
        e.printed_weights.w1, e.printed_weights.w2
    );
    let _ = writeln!(
        s,
        "  bias at corrected weights:        {:.6} (published form), {:.6} (direct expansion)",
        e.bias_as_printed, e.bias_expanded
    );
    s
}

pub fn render_report(table: &ReportTable, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(table),
        ReportFormat::Json => render_json(table),
        ReportFormat::Text => render_text(table),
    }
}
