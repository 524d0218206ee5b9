//! Multi-threaded drivers. Work items are indexed and collected in index
//! order, so results do not depend on the number of workers.

use namefit_core::binning::BinSpec;
use namefit_core::corpus::FrequencyDistribution;
use namefit_core::distributions::RandomSource;
use namefit_core::inference::{run_scenario, suite_benchmark, ScenarioConfig, SuiteData, SuiteReport};
use namefit_core::intervals::{percentile_intervals, ConfidenceInterval, UniformBootstrap};
use namefit_core::Error as CoreError;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// Runs `f` on a pool of `jobs` threads; 0 means one per core.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

pub fn bootstrap_replicates(
    boot: &UniformBootstrap,
    source: &RandomSource,
    replicates: usize,
    jobs: usize,
) -> CliResult<Vec<Vec<f64>>> {
    with_jobs(jobs, || (0..replicates as u64).into_par_iter().map(|r| boot.replicate(source, r)).collect())
}

/// Parallel counterpart of `bootstrap_uniform_ci`; the output is identical
/// for any `jobs`.
pub fn bootstrap_ci(
    reference: &FrequencyDistribution,
    spec: &BinSpec,
    draw_size: usize,
    replicates: usize,
    source: &RandomSource,
    level: f64,
    jobs: usize,
) -> CliResult<Vec<ConfidenceInterval>> {
    if replicates == 0 {
        return Err(CoreError::Domain("at least one replicate is required").into());
    }
    let boot = UniformBootstrap::new(reference, spec, draw_size)?;
    let reps = bootstrap_replicates(&boot, source, replicates, jobs)?;
    Ok(percentile_intervals(&reps, level)?)
}

/// Parallel counterpart of `run_suite`. On failure the error of the lowest
/// failing scenario index is returned.
pub fn run_suite(scenarios: &[ScenarioConfig], data: &SuiteData, alpha: f64, jobs: usize) -> CliResult<SuiteReport> {
    for s in scenarios {
        for tag in [&s.test_source, &s.reference_source] {
            if !data.contains_key(tag) {
                return Err(CoreError::UnknownSource(tag.clone()).into());
            }
        }
    }
    let benchmark = suite_benchmark(scenarios, alpha)?;
    let results: Vec<_> = with_jobs(jobs, || {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_scenario(i, s, data, &benchmark))
            .collect()
    })?;
    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport::from_outcomes(benchmark, outcomes))
}
