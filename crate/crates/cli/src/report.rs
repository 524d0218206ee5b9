//! CSV and JSON renderings of analysis results.

use std::io::Write;

use namefit_core::binning::BinSpec;
use namefit_core::inference::{ExpectedFit, MatrixCell, ResultMatrix, SuiteReport};
use namefit_core::intervals::PlotDataset;
use namefit_core::rare_names::RareRow;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut w: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

/// Writes a header plus rows of already formatted fields.
pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<String>], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BinJson<'a> {
    lo: u64,
    hi: Option<u64>,
    label: &'a str,
    reference_mass: u64,
}

#[derive(Serialize)]
struct BinSpecJson<'a> {
    k: usize,
    reference_total: u64,
    rmse: f64,
    bins: Vec<BinJson<'a>>,
}

pub fn bin_spec_json<W: Write>(spec: &BinSpec, w: W) -> std::io::Result<()> {
    let doc = BinSpecJson {
        k: spec.k(),
        reference_total: spec.reference_total,
        rmse: spec.rmse,
        bins: spec
            .bins
            .iter()
            .map(|b| BinJson { lo: b.lo, hi: b.hi, label: &b.label, reference_mass: b.reference_mass })
            .collect(),
    };
    write_json(&doc, w)
}

pub fn bin_spec_csv<W: Write>(spec: &BinSpec, w: W) -> csv::Result<()> {
    let rows: Vec<Vec<String>> = spec
        .bins
        .iter()
        .map(|b| {
            vec![
                b.lo.to_string(),
                b.hi.map(|h| h.to_string()).unwrap_or_default(),
                b.label.clone(),
                b.reference_mass.to_string(),
            ]
        })
        .collect();
    write_table(&["lo", "hi", "label", "reference_mass"], &rows, w)
}

fn cell_text(cell: &Option<MatrixCell>) -> String {
    match cell {
        None => String::new(),
        Some(MatrixCell::NotApplicable) => "NA".to_string(),
        Some(MatrixCell::Tested { p_value, .. }) => p_value.to_string(),
    }
}

/// One row per (reference, variable), one column per test source.
pub fn matrix_csv<W: Write>(matrix: &ResultMatrix, w: W) -> csv::Result<()> {
    let mut header = vec!["reference", "variable"];
    header.extend(matrix.columns.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = matrix
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.reference.clone(), r.variable.label().to_string()];
            row.extend(r.cells.iter().map(cell_text));
            row
        })
        .collect();
    write_table(&header, &rows, w)
}

pub const SCENARIO_COLUMNS: [&str; 17] = [
    "index",
    "test_source",
    "reference_source",
    "variable",
    "expected_fit",
    "n",
    "cells",
    "bin_attempts",
    "statistic",
    "df",
    "p_value",
    "call",
    "matches_expectation",
    "min_expected",
    "cells_below_five",
    "reference_adjusted",
    "power",
];

fn expected_label(e: ExpectedFit) -> &'static str {
    match e {
        ExpectedFit::Fit => "fit",
        ExpectedFit::NotFit => "not_fit",
        ExpectedFit::NotApplicable => "NA",
    }
}

/// Per-scenario diagnostics.
pub fn scenarios_csv<W: Write>(report: &SuiteReport, w: W) -> csv::Result<()> {
    let rows: Vec<Vec<String>> = report
        .outcomes
        .iter()
        .map(|o| {
            let s = &o.scenario;
            let mut row = vec![
                o.index.to_string(),
                s.test_source.clone(),
                s.reference_source.clone(),
                s.variable.label().to_string(),
                expected_label(s.expected_fit).to_string(),
            ];
            match &o.result {
                None => row.extend(std::iter::repeat_n(String::new(), SCENARIO_COLUMNS.len() - row.len())),
                Some(r) => row.extend([
                    r.n.to_string(),
                    r.labels.len().to_string(),
                    r.bin_attempts.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "),
                    r.gof.statistic.to_string(),
                    r.gof.df.to_string(),
                    r.gof.reported_p_value().to_string(),
                    r.call.label().to_string(),
                    r.matches_expectation.to_string(),
                    r.gof.conditions.min_expected.to_string(),
                    r.gof.conditions.cells_below_five.to_string(),
                    r.gof.reference_adjusted.to_string(),
                    opt(r.power),
                ]),
            }
            row
        })
        .collect();
    write_table(&SCENARIO_COLUMNS, &rows, w)
}

pub fn plot_csv<W: Write>(plot: &PlotDataset, w: W) -> csv::Result<()> {
    let rows: Vec<Vec<String>> = plot
        .rows
        .iter()
        .map(|r| {
            vec![
                r.series.clone(),
                r.bin_label.clone(),
                r.center.to_string(),
                opt(r.lower),
                opt(r.upper),
                r.defined.to_string(),
            ]
        })
        .collect();
    write_table(&["series", "bin_label", "center", "lower", "upper", "defined"], &rows, w)
}

pub fn rare_csv<W: Write>(rows: &[RareRow], w: W) -> csv::Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let exact = if r.tail_exact.is_nan() { String::new() } else { r.tail_exact.to_string() };
            vec![r.k.to_string(), r.tail_binomial.to_string(), exact]
        })
        .collect();
    write_table(&["k", "tail_binomial", "tail_exact"], &rows, w)
}
