//! Hypothesis testing: Pearson goodness-of-fit, independence, power,
//! Bonferroni benchmarks and the multi-scenario suite runner.
//!
//! The null hypothesis is that the test sample fits the reference. A small
//! p-value is evidence against fit; a large one is consistent with it.

mod power;
mod suite;

use alloc::vec::Vec;

pub use power::{noncentrality, power, power_report, power_with, Noncentrality, PowerReport, PowerSpec};
pub use suite::{
    run_scenario, run_suite, suite_benchmark, DroppedCategory, ExpectedFit, FitCall, MatrixCell, MatrixRow,
    ResultMatrix, ScenarioConfig, ScenarioOutcome, ScenarioResult, SubtractionSummary, SuiteData, SuiteReport,
    Variable,
};

use crate::binning::{check_conditions, ConditionReport};
use crate::distributions::chisq_sf;
use crate::{Error, Result};

/// Smallest p-value shown in reports (one ulp at 1.0, about 2.22e-16).
pub const P_VALUE_FLOOR: f64 = f64::EPSILON;

pub(crate) const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GofResult {
    pub statistic: f64,
    pub df: u32,
    /// Raw p-value at machine precision.
    pub p_value: f64,
    pub bins_used: usize,
    pub conditions: ConditionReport,
    pub reference_adjusted: bool,
}

impl GofResult {
    /// p-value clamped to [`P_VALUE_FLOOR`].
    pub fn reported_p_value(&self) -> f64 {
        self.p_value.max(P_VALUE_FLOOR)
    }
}

pub(crate) fn check_probability_vector(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Domain("probabilities must lie in [0, 1]"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// Pearson chi-square goodness-of-fit test of `observed` against
/// `reference_probs`, with no continuity correction.
pub fn gof_test(observed: &[u64], reference_probs: &[f64], n: u64) -> Result<GofResult> {
    if observed.len() != reference_probs.len() {
        return Err(Error::LengthMismatch { left: observed.len(), right: reference_probs.len() });
    }
    if observed.len() < 2 {
        return Err(Error::InvalidArgument("at least 2 categories are required".into()));
    }
    let sum: u64 = observed.iter().sum();
    if sum != n {
        return Err(Error::CountMismatch { observed: sum, n });
    }
    check_probability_vector(reference_probs)?;

    let nf = n as f64;
    let expected: Vec<f64> = reference_probs.iter().map(|p| p * nf).collect();
    if let Some(i) = expected.iter().position(|&e| e == 0.0) {
        return Err(Error::EmptyExpectedCell(i));
    }
    let statistic = pearson(observed, &expected);
    let df = (observed.len() - 1) as u32;
    Ok(GofResult {
        statistic,
        df,
        p_value: chisq_sf(statistic, df)?,
        bins_used: observed.len(),
        conditions: check_conditions(&expected),
        reference_adjusted: false,
    })
}

fn pearson(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Pearson chi-square test of independence on an `r x c` contingency table
/// (rows are samples, columns categories); `df = (r - 1)(c - 1)`.
pub fn independence_test(table: &[Vec<u64>]) -> Result<GofResult> {
    let rows = table.len();
    if rows < 2 {
        return Err(Error::InvalidArgument("independence test needs at least 2 rows".into()));
    }
    let cols = table[0].len();
    if cols < 2 {
        return Err(Error::InvalidArgument("independence test needs at least 2 columns".into()));
    }
    if let Some(bad) = table.iter().find(|r| r.len() != cols) {
        return Err(Error::LengthMismatch { left: cols, right: bad.len() });
    }
    let row_totals: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    if row_totals.contains(&0) || col_totals.contains(&0) {
        return Err(Error::ZeroMarginal);
    }
    let grand: u64 = row_totals.iter().sum();

    let mut statistic = 0.0;
    let mut expected_cells = Vec::with_capacity(rows * cols);
    for (i, row) in table.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = row_totals[i] as f64 * col_totals[j] as f64 / grand as f64;
            let d = o as f64 - e;
            statistic += d * d / e;
            expected_cells.push(e);
        }
    }
    let df = ((rows - 1) * (cols - 1)) as u32;
    Ok(GofResult {
        statistic,
        df,
        p_value: chisq_sf(statistic, df)?,
        bins_used: cols,
        conditions: check_conditions(&expected_cells),
        reference_adjusted: false,
    })
}

/// Significance benchmark divided across a family of tests.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Benchmark {
    pub alpha: f64,
    pub num_tests: usize,
    pub adjusted: f64,
}

/// Bonferroni adjustment. The adjusted level is a reading guide that travels
/// with each p-value, not a hard gate.
pub fn bonferroni(alpha: f64, num_tests: usize) -> Result<Benchmark> {
    if num_tests == 0 {
        return Err(Error::NoTests);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must lie in (0, 1)"));
    }
    Ok(Benchmark { alpha, num_tests, adjusted: alpha / num_tests as f64 })
}
