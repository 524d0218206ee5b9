//! Declarative multi-test runner.
//!
//! Each scenario names a test sample and a reference by source tag, the
//! variable compared (name frequency or name origin), and the outcome the
//! study expects. Scenarios marked `NA` are carried through to the result
//! matrix but not run and not counted in the Bonferroni family.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{bonferroni, gof_test, power, Benchmark, GofResult, PowerSpec};
use crate::binning::{bin_with_fallback, check_conditions, BinSpec, DEFAULT_BINS};
use crate::corpus::{
    build_frequency_distribution, build_origin_distribution, OccurrenceRecord, Shortfall,
};
use crate::{Error, Result};

/// Records available to a suite, keyed by source tag.
pub type SuiteData = BTreeMap<String, Vec<OccurrenceRecord>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variable {
    Frequency,
    Origin,
}

impl Variable {
    pub fn label(self) -> &'static str {
        match self {
            Variable::Frequency => "frequency",
            Variable::Origin => "origin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExpectedFit {
    Fit,
    NotFit,
    #[cfg_attr(feature = "serde", serde(rename = "NA", alias = "na"))]
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitCall {
    Fit,
    NotFit,
}

impl FitCall {
    pub fn label(self) -> &'static str {
        match self {
            FitCall::Fit => "fit",
            FitCall::NotFit => "not_fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioConfig {
    pub test_source: String,
    pub reference_source: String,
    pub variable: Variable,
    pub expected_fit: ExpectedFit,
    #[cfg_attr(feature = "serde", serde(default))]
    pub subtract_from_reference: bool,
    #[cfg_attr(feature = "serde", serde(default))]
    pub merge_semitic: bool,
    #[cfg_attr(feature = "serde", serde(default = "default_bins"))]
    pub k: usize,
    /// Alternative category probabilities for a power figure; optional.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub alternative: Option<Vec<f64>>,
}

#[cfg(feature = "serde")]
fn default_bins() -> usize {
    DEFAULT_BINS
}

impl ScenarioConfig {
    pub fn new(test_source: &str, reference_source: &str, variable: Variable, expected_fit: ExpectedFit) -> Self {
        Self {
            test_source: test_source.to_string(),
            reference_source: reference_source.to_string(),
            variable,
            expected_fit,
            subtract_from_reference: false,
            merge_semitic: false,
            k: DEFAULT_BINS,
            alternative: None,
        }
    }

    pub fn is_applicable(&self) -> bool {
        self.expected_fit != ExpectedFit::NotApplicable
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DroppedCategory {
    pub label: String,
    /// Test occurrences removed along with the category.
    pub observed: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubtractionSummary {
    pub removed: u64,
    pub reference_total_before: u64,
    pub exact: bool,
    pub shortfalls: Vec<Shortfall>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioResult {
    pub gof: GofResult,
    pub labels: Vec<String>,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub n: u64,
    pub bins: Option<BinSpec>,
    pub bin_attempts: Vec<usize>,
    pub dropped_categories: Vec<DroppedCategory>,
    pub subtraction: Option<SubtractionSummary>,
    pub call: FitCall,
    pub matches_expectation: bool,
    pub power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioOutcome {
    pub index: usize,
    pub scenario: ScenarioConfig,
    /// `None` for `NA` scenarios.
    pub result: Option<ScenarioResult>,
}

/// Bonferroni benchmark for the applicable scenarios of a suite.
pub fn suite_benchmark(scenarios: &[ScenarioConfig], alpha: f64) -> Result<Benchmark> {
    bonferroni(alpha, scenarios.iter().filter(|s| s.is_applicable()).count())
}

fn records<'a>(data: &'a SuiteData, tag: &str) -> Result<&'a [OccurrenceRecord]> {
    data.get(tag)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::UnknownSource(tag.to_string()))
}

/// Runs one scenario. `index` is only used for diagnostics.
pub fn run_scenario(
    index: usize,
    scenario: &ScenarioConfig,
    data: &SuiteData,
    benchmark: &Benchmark,
) -> Result<ScenarioOutcome> {
    let test = records(data, &scenario.test_source)?;
    let reference = records(data, &scenario.reference_source)?;
    if !scenario.is_applicable() {
        return Ok(ScenarioOutcome { index, scenario: scenario.clone(), result: None });
    }

    let prepared = match scenario.variable {
        Variable::Frequency => frequency_cells(index, scenario, test, reference)?,
        Variable::Origin => origin_cells(scenario, test, reference)?,
    };
    let Prepared { labels, observed, probs, bins, bin_attempts, dropped_categories, subtraction } = prepared;

    let n: u64 = observed.iter().sum();
    let mut gof = gof_test(&observed, &probs, n)?;
    gof.reference_adjusted = scenario.subtract_from_reference;
    let expected: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    gof.conditions = check_conditions(&expected);

    let call = if gof.p_value >= benchmark.adjusted { FitCall::Fit } else { FitCall::NotFit };
    let matches_expectation = matches!(
        (call, scenario.expected_fit),
        (FitCall::Fit, ExpectedFit::Fit) | (FitCall::NotFit, ExpectedFit::NotFit)
    );
    let power = match &scenario.alternative {
        Some(alt) => Some(power(&PowerSpec::normalized(probs.clone(), alt.clone(), n, benchmark.alpha)?)?),
        None => None,
    };

    Ok(ScenarioOutcome {
        index,
        scenario: scenario.clone(),
        result: Some(ScenarioResult {
            gof,
            labels,
            observed,
            expected,
            n,
            bins,
            bin_attempts,
            dropped_categories,
            subtraction,
            call,
            matches_expectation,
            power,
        }),
    })
}

struct Prepared {
    labels: Vec<String>,
    observed: Vec<u64>,
    probs: Vec<f64>,
    bins: Option<BinSpec>,
    bin_attempts: Vec<usize>,
    dropped_categories: Vec<DroppedCategory>,
    subtraction: Option<SubtractionSummary>,
}

fn frequency_cells(
    index: usize,
    scenario: &ScenarioConfig,
    test: &[OccurrenceRecord],
    reference: &[OccurrenceRecord],
) -> Result<Prepared> {
    let test = build_frequency_distribution(test);
    let mut reference = build_frequency_distribution(reference);
    let mut subtraction = None;
    if scenario.subtract_from_reference {
        let before = reference.total();
        let sub = reference.subtract_sample(&test);
        subtraction = Some(SubtractionSummary {
            removed: sub.removed,
            reference_total_before: before,
            exact: sub.is_exact(),
            shortfalls: sub.shortfalls,
        });
        reference = sub.result;
    }
    let adaptive = bin_with_fallback(&test, &reference, scenario.k).map_err(|e| match e {
        Error::ConditionsUnmet => Error::ConditionFallbackExhausted(index),
        other => other,
    })?;
    Ok(Prepared {
        labels: adaptive.spec.labels(),
        observed: adaptive.counts.observed.clone(),
        probs: adaptive.spec.reference_probs(),
        bins: Some(adaptive.spec),
        bin_attempts: adaptive.attempts,
        dropped_categories: Vec::new(),
        subtraction,
    })
}

fn origin_cells(scenario: &ScenarioConfig, test: &[OccurrenceRecord], reference: &[OccurrenceRecord]) -> Result<Prepared> {
    let test = build_origin_distribution(test, scenario.merge_semitic)?.distribution;
    let mut reference = build_origin_distribution(reference, scenario.merge_semitic)?.distribution;
    let mut subtraction = None;
    if scenario.subtract_from_reference {
        let before = reference.total();
        let sub = reference.subtract_sample(&test);
        subtraction = Some(SubtractionSummary {
            removed: sub.removed,
            reference_total_before: before,
            exact: sub.is_exact(),
            shortfalls: sub.shortfalls,
        });
        reference = sub.result;
    }
    if reference.total() == 0 {
        return Err(Error::EmptyReference);
    }

    let mut labels = Vec::new();
    let mut observed = Vec::new();
    let mut ref_counts = Vec::new();
    let mut dropped = Vec::new();
    for cat in reference.categories() {
        let r = reference.count(cat);
        let t = test.count(cat);
        if r == 0 {
            dropped.push(DroppedCategory { label: cat.label().to_string(), observed: t });
        } else {
            labels.push(cat.label().to_string());
            observed.push(t);
            ref_counts.push(r);
        }
    }
    if labels.len() < 2 {
        return Err(Error::InvalidArgument("fewer than 2 origin categories with reference mass".into()));
    }
    let kept: u64 = ref_counts.iter().sum();
    let probs = ref_counts.iter().map(|&c| c as f64 / kept as f64).collect();
    Ok(Prepared {
        labels,
        observed,
        probs,
        bins: None,
        bin_attempts: Vec::new(),
        dropped_categories: dropped,
        subtraction,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuiteReport {
    pub benchmark: Benchmark,
    pub outcomes: Vec<ScenarioOutcome>,
    pub evaluated: usize,
    pub matched: usize,
}

impl SuiteReport {
    /// Assembles a report; outcomes are ordered by scenario index whatever
    /// order they arrive in.
    pub fn from_outcomes(benchmark: Benchmark, mut outcomes: Vec<ScenarioOutcome>) -> Self {
        outcomes.sort_by_key(|o| o.index);
        let evaluated = outcomes.iter().filter(|o| o.result.is_some()).count();
        let matched = outcomes
            .iter()
            .filter_map(|o| o.result.as_ref())
            .filter(|r| r.matches_expectation)
            .count();
        Self { benchmark, outcomes, evaluated, matched }
    }

    /// Rows are (reference, variable) pairs and columns test sources, both in
    /// order of first appearance.
    pub fn matrix(&self) -> ResultMatrix {
        let mut columns: Vec<String> = Vec::new();
        let mut rows: Vec<MatrixRow> = Vec::new();
        for o in &self.outcomes {
            if !columns.contains(&o.scenario.test_source) {
                columns.push(o.scenario.test_source.clone());
            }
        }
        for o in &self.outcomes {
            let pos = rows
                .iter()
                .position(|r| r.reference == o.scenario.reference_source && r.variable == o.scenario.variable);
            let row = match pos {
                Some(p) => &mut rows[p],
                None => {
                    rows.push(MatrixRow {
                        reference: o.scenario.reference_source.clone(),
                        variable: o.scenario.variable,
                        cells: alloc::vec![None; columns.len()],
                    });
                    rows.last_mut().expect("just pushed")
                }
            };
            let col = columns.iter().position(|c| *c == o.scenario.test_source).expect("column exists");
            row.cells[col] = Some(match &o.result {
                None => MatrixCell::NotApplicable,
                Some(r) => MatrixCell::Tested {
                    p_value: r.gof.reported_p_value(),
                    call: r.call,
                    matches_expectation: r.matches_expectation,
                },
            });
        }
        ResultMatrix { columns, rows }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MatrixCell {
    NotApplicable,
    Tested { p_value: f64, call: FitCall, matches_expectation: bool },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatrixRow {
    pub reference: String,
    pub variable: Variable,
    /// `None` where no scenario covers the cell.
    pub cells: Vec<Option<MatrixCell>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResultMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

/// Runs every scenario in order. Source tags are all resolved before any
/// scenario runs.
pub fn run_suite(scenarios: &[ScenarioConfig], data: &SuiteData, alpha: f64) -> Result<SuiteReport> {
    for s in scenarios {
        records(data, &s.test_source)?;
        records(data, &s.reference_source)?;
    }
    let benchmark = suite_benchmark(scenarios, alpha)?;
    let outcomes = scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| run_scenario(i, s, data, &benchmark))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::from_outcomes(benchmark, outcomes))
}
