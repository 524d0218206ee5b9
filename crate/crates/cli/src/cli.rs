//! Command-line interface.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use namefit_core::binning::{bin_with_fallback, compute_bins, profile, DEFAULT_BINS};
use namefit_core::corpus::{
    build_frequency_distribution, build_origin_distribution, filter_records, DateWindow, DatingPolicy, FlagPolicy,
    FrequencyDistribution, Gender, OccurrenceRecord, RecordFilter, Region,
};
use namefit_core::distributions::{hypergeom_cdf, RandomSource};
use namefit_core::inference::{
    bonferroni, gof_test, independence_test, power_report, run_scenario, ExpectedFit, GofResult, Noncentrality,
    PowerSpec, ScenarioConfig, SuiteData, Variable,
};
use namefit_core::intervals::{wald_ci, DEFAULT_LEVEL, DEFAULT_REPLICATES};
use namefit_core::rare_names::{
    binomial_tails, calibrate_probability, count_rare, rare_tail, RareDefinition, RareRow, RareSpec,
};
use serde::Serialize;

use crate::config::{resolve_sources, SuiteFile};
use crate::error::{CliError, CliResult, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use crate::figures::build_figure;
use crate::io::{create_file, load_corpus, load_input, write_distribution, Input, LoadedCorpus};
use crate::manifest::{write_manifest, FileDigest, RunManifest};
use crate::parallel;
use crate::report::{self, opt, write_json, write_table, Format};

#[derive(Debug, Parser)]
#[command(name = "namefit", version, about = "Goodness-of-fit tests for personal-name samples against a reference population")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Does not change results.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check corpus files; exits 2 if any row is rejected.
    Validate {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
    },
    /// Frequency (or origin) distribution of a corpus slice.
    Distribution {
        input: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        origin: bool,
        #[arg(long)]
        merge_semitic: bool,
    },
    /// Equal-frequency bins of a reference distribution.
    Bins {
        reference: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Pearson goodness-of-fit test.
    Gof(GofArgs),
    /// Chi-square test of independence.
    Independence(IndependenceArgs),
    /// Power of the goodness-of-fit test against an alternative.
    Power(PowerArgs),
    /// Wald confidence intervals for proportions.
    Ci {
        #[arg(long, conflicts_with = "counts")]
        count: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<u64>>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: f64,
    },
    /// Percentile intervals for bin shares of uniform draws of distinct names.
    BootstrapCi {
        reference: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        draw: usize,
        #[arg(long, default_value_t = DEFAULT_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: f64,
    },
    /// Probability of so few rare names in a sample.
    Rare(RareArgs),
    /// Runs a scenario suite and writes the result matrix.
    Suite(RunArgs),
    /// Writes plot datasets for the configured figures.
    Figures(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatingArg {
    Inclusive,
    Exclusive,
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    /// Keep records with this source tag (repeatable).
    #[arg(long = "source")]
    pub sources: Vec<String>,
    /// Date window START:END in signed years, e.g. -4:73.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(i32, i32)>,
    #[arg(long, value_enum, default_value_t = DatingArg::Inclusive)]
    pub dating: DatingArg,
    #[arg(long, value_parser = parse_gender)]
    pub gender: Option<Gender>,
    #[arg(long, value_parser = parse_region)]
    pub region: Option<Region>,
    #[arg(long)]
    pub exclude_fictitious: bool,
    #[arg(long)]
    pub exclude_nicknames: bool,
    /// Drop records with this exclude_category (repeatable).
    #[arg(long = "exclude")]
    pub exclusions: Vec<String>,
}

fn parse_window(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let a = a.trim().parse().map_err(|_| format!("bad year `{a}`"))?;
    let b = b.trim().parse().map_err(|_| format!("bad year `{b}`"))?;
    if a > b {
        return Err("window start after end".into());
    }
    Ok((a, b))
}

fn parse_gender(s: &str) -> Result<Gender, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_region(s: &str) -> Result<Region, String> {
    s.parse().map_err(|e| format!("{e}"))
}

impl FilterArgs {
    fn is_empty(&self) -> bool {
        self.sources.is_empty()
            && self.window.is_none()
            && self.gender.is_none()
            && self.region.is_none()
            && !self.exclude_fictitious
            && !self.exclude_nicknames
            && self.exclusions.is_empty()
    }

    fn to_filter(&self) -> CliResult<RecordFilter> {
        let flag = |exclude| if exclude { FlagPolicy::Exclude } else { FlagPolicy::Include };
        let policy = match self.dating {
            DatingArg::Inclusive => DatingPolicy::Inclusive,
            DatingArg::Exclusive => DatingPolicy::Exclusive,
        };
        Ok(RecordFilter {
            window: self.window.map(|(a, b)| DateWindow::new(a, b, policy)).transpose()?,
            gender: self.gender,
            region: self.region,
            fictitious: flag(self.exclude_fictitious),
            nicknames: flag(self.exclude_nicknames),
            exclusions: self.exclusions.iter().cloned().collect(),
            source_tags: (!self.sources.is_empty()).then(|| self.sources.iter().cloned().collect()),
        })
    }
}

#[derive(Debug, Args)]
pub struct GofArgs {
    /// Observed counts, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["test", "reference"])]
    pub observed: Option<Vec<u64>>,
    /// Equal probabilities over this many categories.
    #[arg(long, conflicts_with = "probs")]
    pub uniform: Option<usize>,
    /// Category weights, rescaled to sum to 1.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[command(flatten)]
    pub files: SampleFiles,
    /// Remove the test occurrences from the reference first.
    #[arg(long)]
    pub subtract: bool,
}

#[derive(Debug, Args)]
pub struct SampleFiles {
    /// Test sample: corpus CSV or name,count CSV.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Reference: corpus CSV or name,count CSV.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub test_source: Option<String>,
    #[arg(long)]
    pub reference_source: Option<String>,
    /// Compare name origins instead of frequencies.
    #[arg(long)]
    pub origin: bool,
    #[arg(long)]
    pub merge_semitic: bool,
}

#[derive(Debug, Args)]
pub struct IndependenceArgs {
    /// Contingency table: rows separated by `;`, cells by `,`.
    #[arg(long, conflicts_with_all = ["test", "reference"])]
    pub table: Option<String>,
    #[command(flatten)]
    pub files: SampleFiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Alternative,
    Pearson,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Null probabilities, or `uK` for K equal categories.
    #[arg(long)]
    pub null: String,
    /// Alternative probabilities, rescaled to sum to 1.
    #[arg(long, value_delimiter = ',')]
    pub alt: Vec<f64>,
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Alternative)]
    pub convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DefinitionArg {
    Once,
    OnceOrTwice,
}

#[derive(Debug, Args)]
pub struct RareArgs {
    /// Sample size.
    #[arg(long)]
    pub n: Option<u64>,
    /// Observed rare occurrences.
    #[arg(long)]
    pub k: Option<u64>,
    /// Occurrences in the reference pool.
    #[arg(long)]
    pub pool: Option<u64>,
    /// Rare occurrences in the pool.
    #[arg(long = "rare-occ")]
    pub rare_occ: Option<u64>,
    #[command(flatten)]
    pub files: SampleFiles,
    #[arg(long, value_enum, default_value_t = DefinitionArg::Once)]
    pub definition: DefinitionArg,
    /// Rows of the output table; defaults to 0..=n.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<u64>>,
    /// Solve for the rare probability giving this tail at k, then tabulate.
    #[arg(long)]
    pub calibrate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Extra corpus files (repeatable).
    #[arg(long = "corpus")]
    pub corpora: Vec<PathBuf>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    argv: Vec<String>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::io("<output>", std::io::Error::other(e))
}

impl Ctx<'_> {
    fn emit<T: Serialize>(&mut self, json: &T, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
        match self.cli.format {
            Format::Json => write_json(json, &mut *self.out).map_err(stdout_err),
            Format::Csv => write_table(header, &rows, &mut *self.out).map_err(csv_err),
        }
    }

    fn warn_rejections(&mut self, corpus: &LoadedCorpus) {
        if !corpus.rejections.is_empty() {
            let _ = writeln!(
                self.err,
                "warning: {}: {} rows rejected; run `namefit validate` for details",
                corpus.path.display(),
                corpus.rejections.len()
            );
        }
    }

    fn load_records(&mut self, path: &Path) -> CliResult<Vec<OccurrenceRecord>> {
        let corpus = load_corpus(path)?;
        self.warn_rejections(&corpus);
        Ok(corpus.records)
    }

    /// Records of one sample. A name,count file becomes one synthetic record
    /// per occurrence.
    fn sample_records(&mut self, path: &Path, tag: Option<&str>, origin: bool) -> CliResult<Vec<OccurrenceRecord>> {
        match load_input(path)? {
            Input::Corpus(c) => {
                self.warn_rejections(&c);
                Ok(match tag {
                    Some(t) => c.records.into_iter().filter(|r| r.source_tag == t).collect(),
                    None => c.records,
                })
            }
            Input::Distribution(d) => {
                if origin {
                    return Err(CliError::Usage(format!(
                        "{}: origin tests need a corpus file, not name,count",
                        path.display()
                    )));
                }
                Ok(records_from_distribution(&d))
            }
        }
    }

    fn frequency_input(&mut self, path: &Path, filter: &FilterArgs) -> CliResult<FrequencyDistribution> {
        match load_input(path)? {
            Input::Corpus(c) => {
                self.warn_rejections(&c);
                Ok(build_frequency_distribution(&filter_records(&c.records, &filter.to_filter()?)))
            }
            Input::Distribution(d) if filter.is_empty() => Ok(d),
            Input::Distribution(_) => Err(CliError::Usage("record filters need a corpus file, not name,count".into())),
        }
    }
}

pub fn records_from_distribution(dist: &FrequencyDistribution) -> Vec<OccurrenceRecord> {
    dist.iter()
        .flat_map(|(name, c)| (0..c).map(move |i| OccurrenceRecord::new(format!("{name}#{i}"), name)))
        .collect()
}

/// Parses arguments and runs a command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Ctx {
        cli: &cli,
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        out,
        err,
    };
    match execute(&mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let cli = ctx.cli;
    if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
        return Err(CliError::Usage("--alpha must lie in (0, 1)".into()));
    }
    match &cli.command {
        Command::Validate { corpora } => cmd_validate(ctx, corpora),
        Command::Distribution { input, filter, origin, merge_semitic } => {
            cmd_distribution(ctx, input, filter, *origin, *merge_semitic).map(|_| EXIT_OK)
        }
        Command::Bins { reference, filter } => cmd_bins(ctx, reference, filter).map(|_| EXIT_OK),
        Command::Gof(a) => cmd_gof(ctx, a).map(|_| EXIT_OK),
        Command::Independence(a) => cmd_independence(ctx, a).map(|_| EXIT_OK),
        Command::Power(a) => cmd_power(ctx, a).map(|_| EXIT_OK),
        Command::Ci { count, counts, n, level } => cmd_ci(ctx, *count, counts.as_deref(), *n, *level).map(|_| EXIT_OK),
        Command::BootstrapCi { reference, filter, draw, replicates, level } => {
            cmd_bootstrap(ctx, reference, filter, *draw, *replicates, *level).map(|_| EXIT_OK)
        }
        Command::Rare(a) => cmd_rare(ctx, a).map(|_| EXIT_OK),
        Command::Suite(a) => cmd_suite(ctx, a).map(|_| EXIT_OK),
        Command::Figures(a) => cmd_figures(ctx, a).map(|_| EXIT_OK),
    }
}

#[derive(Serialize)]
struct ValidationReport {
    path: String,
    rows: usize,
    records: usize,
    rejected: usize,
    source_tags: Vec<String>,
    rejections: Vec<crate::io::RowRejection>,
}

fn cmd_validate(ctx: &mut Ctx<'_>, paths: &[PathBuf]) -> CliResult<i32> {
    let mut reports = Vec::new();
    for p in paths {
        let c = load_corpus(p)?;
        reports.push(ValidationReport {
            path: p.display().to_string(),
            rows: c.rows(),
            records: c.records.len(),
            rejected: c.rejections.len(),
            source_tags: c.source_tags().into_iter().map(str::to_string).collect(),
            rejections: c.rejections.clone(),
        });
    }
    let rows = reports
        .iter()
        .flat_map(|r| r.rejections.iter().map(|x| vec![r.path.clone(), x.line.to_string(), x.reason.clone()]))
        .collect();
    ctx.emit(&reports, &["path", "line", "reason"], rows)?;
    for r in &reports {
        let _ = writeln!(ctx.err, "{}: {} rows, {} records, {} rejected", r.path, r.rows, r.records, r.rejected);
    }
    Ok(if reports.iter().any(|r| r.rejected > 0) { EXIT_DATA } else { EXIT_OK })
}

fn cmd_distribution(ctx: &mut Ctx<'_>, input: &Path, filter: &FilterArgs, origin: bool, merge: bool) -> CliResult<()> {
    if origin {
        let records = filter_records(&ctx.load_records(input)?, &filter.to_filter()?);
        let report = build_origin_distribution(&records, merge)?;
        if report.missing_origin > 0 {
            let _ = writeln!(ctx.err, "warning: {} occurrences have no origin", report.missing_origin);
        }
        let d = &report.distribution;
        #[derive(Serialize)]
        struct Row {
            category: &'static str,
            count: u64,
        }
        let json: Vec<Row> = d.iter().map(|(c, n)| Row { category: c.label(), count: n }).collect();
        let rows = d.iter().map(|(c, n)| vec![c.label().to_string(), n.to_string()]).collect();
        return ctx.emit(&json, &["category", "count"], rows);
    }
    let dist = ctx.frequency_input(input, filter)?;
    match ctx.cli.format {
        Format::Csv => write_distribution(&dist, &mut *ctx.out).map_err(csv_err),
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                total: u64,
                distinct: usize,
                counts: Vec<(&'a str, u64)>,
            }
            let doc = Doc { total: dist.total(), distinct: dist.distinct(), counts: dist.sorted_by_count() };
            write_json(&doc, &mut *ctx.out).map_err(stdout_err)
        }
    }
}

fn cmd_bins(ctx: &mut Ctx<'_>, reference: &Path, filter: &FilterArgs) -> CliResult<()> {
    let dist = ctx.frequency_input(reference, filter)?;
    let spec = compute_bins(&profile(&dist)?, ctx.cli.bins)?;
    match ctx.cli.format {
        Format::Json => report::bin_spec_json(&spec, &mut *ctx.out).map_err(stdout_err),
        Format::Csv => report::bin_spec_csv(&spec, &mut *ctx.out).map_err(csv_err),
    }
}

#[derive(Serialize)]
struct TestOutput {
    statistic: f64,
    df: u32,
    p_value: f64,
    reported_p_value: f64,
    n: u64,
    labels: Vec<String>,
    observed: Vec<u64>,
    expected: Vec<f64>,
    bin_attempts: Vec<usize>,
    min_expected: f64,
    cells_below_five: usize,
    conditions_met: bool,
    reference_adjusted: bool,
}

const TEST_COLUMNS: [&str; 8] =
    ["statistic", "df", "p_value", "n", "cells", "min_expected", "cells_below_five", "conditions_met"];

impl TestOutput {
    fn new(gof: &GofResult, labels: Vec<String>, observed: Vec<u64>, expected: Vec<f64>, attempts: Vec<usize>) -> Self {
        Self {
            statistic: gof.statistic,
            df: gof.df,
            p_value: gof.p_value,
            reported_p_value: gof.reported_p_value(),
            n: observed.iter().sum(),
            labels,
            observed,
            expected,
            bin_attempts: attempts,
            min_expected: gof.conditions.min_expected,
            cells_below_five: gof.conditions.cells_below_five,
            conditions_met: gof.conditions.passes(),
            reference_adjusted: gof.reference_adjusted,
        }
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.statistic.to_string(),
            self.df.to_string(),
            self.reported_p_value.to_string(),
            self.n.to_string(),
            self.observed.len().to_string(),
            self.min_expected.to_string(),
            self.cells_below_five.to_string(),
            self.conditions_met.to_string(),
        ]
    }
}

fn normalize(weights: &[f64]) -> CliResult<Vec<f64>> {
    let s: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !(s > 0.0) {
        return Err(CliError::Usage("probabilities must be nonnegative with a positive sum".into()));
    }
    Ok(weights.iter().map(|w| w / s).collect())
}

fn parse_null(spec: &str) -> CliResult<Vec<f64>> {
    if let Some(k) = spec.strip_prefix('u') {
        let k: usize = k.parse().map_err(|_| CliError::Usage(format!("bad uniform spec `{spec}`")))?;
        if k < 2 {
            return Err(CliError::Usage("a uniform null needs at least 2 categories".into()));
        }
        return Ok(vec![1.0 / k as f64; k]);
    }
    let weights = spec
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("bad probability list `{spec}`")))?;
    normalize(&weights)
}

fn sample_data(ctx: &mut Ctx<'_>, files: &SampleFiles) -> CliResult<SuiteData> {
    let (Some(test), Some(reference)) = (&files.test, &files.reference) else {
        return Err(CliError::Usage("give --observed, or both --test and --reference".into()));
    };
    let mut data = SuiteData::new();
    data.insert("test".into(), ctx.sample_records(test, files.test_source.as_deref(), files.origin)?);
    data.insert("reference".into(), ctx.sample_records(reference, files.reference_source.as_deref(), files.origin)?);
    Ok(data)
}

fn cmd_gof(ctx: &mut Ctx<'_>, a: &GofArgs) -> CliResult<()> {
    let output = if let Some(observed) = &a.observed {
        let probs = match (a.uniform, &a.probs) {
            (Some(k), None) => vec![1.0 / k as f64; k],
            (None, Some(w)) => normalize(w)?,
            _ => return Err(CliError::Usage("with --observed give --uniform or --probs".into())),
        };
        let n = observed.iter().sum();
        let gof = gof_test(observed, &probs, n)?;
        let labels = (1..=observed.len()).map(|i| i.to_string()).collect();
        let expected = probs.iter().map(|p| p * n as f64).collect();
        TestOutput::new(&gof, labels, observed.clone(), expected, Vec::new())
    } else {
        let data = sample_data(ctx, &a.files)?;
        let variable = if a.files.origin { Variable::Origin } else { Variable::Frequency };
        let mut scenario = ScenarioConfig::new("test", "reference", variable, ExpectedFit::Fit);
        scenario.subtract_from_reference = a.subtract;
        scenario.merge_semitic = a.files.merge_semitic;
        scenario.k = ctx.cli.bins;
        let outcome = run_scenario(0, &scenario, &data, &bonferroni(ctx.cli.alpha, 1)?)?;
        let r = outcome.result.expect("applicable scenario has a result");
        for d in &r.dropped_categories {
            let _ = writeln!(ctx.err, "note: dropped {} (no reference mass, {} test occurrences)", d.label, d.observed);
        }
        TestOutput::new(&r.gof, r.labels, r.observed, r.expected, r.bin_attempts)
    };
    let row = output.row();
    ctx.emit(&output, &TEST_COLUMNS, vec![row])
}

fn parse_table(text: &str) -> CliResult<Vec<Vec<u64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|c| c.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Usage(format!("bad table row `{row}`")))
        })
        .collect()
}

fn cmd_independence(ctx: &mut Ctx<'_>, a: &IndependenceArgs) -> CliResult<()> {
    let (table, labels, attempts) = if let Some(t) = &a.table {
        let table = parse_table(t)?;
        let labels = (1..=table.first().map_or(0, Vec::len)).map(|i| i.to_string()).collect();
        (table, labels, Vec::new())
    } else {
        if a.files.origin {
            return Err(CliError::Usage("independence from files supports frequency data only".into()));
        }
        let data = sample_data(ctx, &a.files)?;
        let test = build_frequency_distribution(&data["test"]);
        let reference = build_frequency_distribution(&data["reference"]);
        let adaptive = bin_with_fallback(&test, &reference, ctx.cli.bins)?;
        let masses = adaptive.spec.bins.iter().map(|b| b.reference_mass).collect();
        (vec![adaptive.counts.observed.clone(), masses], adaptive.spec.labels(), adaptive.attempts)
    };
    let result = independence_test(&table)?;
    let first = table.first().cloned().unwrap_or_default();
    let output = TestOutput::new(&result, labels, first, Vec::new(), attempts);
    let row = output.row();
    ctx.emit(&output, &TEST_COLUMNS, vec![row])
}

fn cmd_power(ctx: &mut Ctx<'_>, a: &PowerArgs) -> CliResult<()> {
    let null = parse_null(&a.null)?;
    let alt = normalize(&a.alt)?;
    let spec = PowerSpec::new(null, alt, a.n, ctx.cli.alpha)?;
    let convention = match a.convention {
        ConventionArg::Alternative => Noncentrality::AlternativeWeighted,
        ConventionArg::Pearson => Noncentrality::Pearson,
    };
    let r = power_report(&spec, convention)?;
    let row = vec![r.df.to_string(), r.lambda.to_string(), r.critical_value.to_string(), r.power.to_string()];
    ctx.emit(&r, &["df", "lambda", "critical_value", "power"], vec![row])
}

fn cmd_ci(ctx: &mut Ctx<'_>, count: Option<u64>, counts: Option<&[u64]>, n: u64, level: f64) -> CliResult<()> {
    let counts: Vec<u64> = match (count, counts) {
        (Some(c), None) => vec![c],
        (None, Some(cs)) => cs.to_vec(),
        _ => return Err(CliError::Usage("give --count or --counts".into())),
    };
    let cis = counts.iter().map(|&c| wald_ci(c, n, level)).collect::<Result<Vec<_>, _>>()?;
    let rows = counts
        .iter()
        .zip(&cis)
        .map(|(c, ci)| {
            vec![
                c.to_string(),
                n.to_string(),
                ci.center.to_string(),
                opt(ci.defined.then_some(ci.lower)),
                opt(ci.defined.then_some(ci.upper)),
                ci.defined.to_string(),
            ]
        })
        .collect();
    ctx.emit(&cis, &["count", "n", "center", "lower", "upper", "defined"], rows)
}

fn cmd_bootstrap(
    ctx: &mut Ctx<'_>,
    reference: &Path,
    filter: &FilterArgs,
    draw: usize,
    replicates: usize,
    level: f64,
) -> CliResult<()> {
    let dist = ctx.frequency_input(reference, filter)?;
    let spec = compute_bins(&profile(&dist)?, ctx.cli.bins)?;
    let source = RandomSource::new(ctx.cli.seed);
    let cis = parallel::bootstrap_ci(&dist, &spec, draw, replicates, &source, level, ctx.cli.jobs)?;
    let labels = spec.labels();
    let rows = labels
        .iter()
        .zip(&cis)
        .map(|(l, ci)| vec![l.clone(), ci.center.to_string(), ci.lower.to_string(), ci.upper.to_string()])
        .collect();
    #[derive(Serialize)]
    struct Doc<'a> {
        seed: u64,
        rng: &'static str,
        replicates: usize,
        draw_size: usize,
        labels: &'a [String],
        intervals: &'a [namefit_core::intervals::ConfidenceInterval],
    }
    let doc = Doc {
        seed: ctx.cli.seed,
        rng: RandomSource::ALGORITHM,
        replicates,
        draw_size: draw,
        labels: &labels,
        intervals: &cis,
    };
    ctx.emit(&doc, &["bin_label", "center", "lower", "upper"], rows)
}

#[derive(Serialize)]
struct RareOutput {
    definition: RareDefinition,
    draw_size: u64,
    probability: f64,
    pool_occurrences: Option<u64>,
    rare_occurrences: Option<u64>,
    observed_rare: Option<u64>,
    tail_binomial: Option<f64>,
    tail_exact: Option<f64>,
    max_gap: Option<f64>,
    approximation_flagged: Option<bool>,
    rows: Vec<RareRow>,
}

fn cmd_rare(ctx: &mut Ctx<'_>, a: &RareArgs) -> CliResult<()> {
    let definition = match a.definition {
        DefinitionArg::Once => RareDefinition::Once,
        DefinitionArg::OnceOrTwice => RareDefinition::OnceOrTwice,
    };
    let output = if let Some(target) = a.calibrate {
        let (Some(n), Some(k)) = (a.n, a.k) else {
            return Err(CliError::Usage("--calibrate needs --n and --k".into()));
        };
        let p = calibrate_probability(n, k, target)?;
        let ks: Vec<u64> = a.ks.clone().unwrap_or_else(|| (0..=n).collect());
        let binom = binomial_tails(n, p, &ks)?;
        let rare_occ = a.pool.map(|pool| (p * pool as f64).round() as u64);
        let mut rows = Vec::new();
        for (&j, &b) in ks.iter().zip(&binom) {
            let exact = match (a.pool, rare_occ) {
                (Some(pool), Some(r)) => hypergeom_cdf(j, pool, r, n)?,
                _ => f64::NAN,
            };
            rows.push(RareRow { k: j, tail_binomial: b, tail_exact: exact });
        }
        let max_gap = a.pool.map(|_| rows.iter().map(RareRow::gap).fold(0.0, f64::max));
        RareOutput {
            definition,
            draw_size: n,
            probability: p,
            pool_occurrences: a.pool,
            rare_occurrences: rare_occ,
            observed_rare: Some(k),
            tail_binomial: Some(target),
            tail_exact: None,
            max_gap,
            approximation_flagged: max_gap.map(|g| g > namefit_core::rare_names::APPROXIMATION_FLAG),
            rows,
        }
    } else {
        let (spec, observed) = if a.files.test.is_some() || a.files.reference.is_some() {
            let data = sample_data(ctx, &a.files)?;
            let test = build_frequency_distribution(&data["test"]);
            let reference = build_frequency_distribution(&data["reference"]);
            let k = count_rare(&test, &reference, definition);
            (RareSpec::from_reference(&reference, definition, test.total())?, k)
        } else {
            let (Some(n), Some(k), Some(pool), Some(rare)) = (a.n, a.k, a.pool, a.rare_occ) else {
                return Err(CliError::Usage("give --n --k --pool --rare-occ, or --test and --reference".into()));
            };
            (RareSpec::new(definition, pool, rare, n)?, k)
        };
        let result = rare_tail(&spec, observed)?;
        let rows = match &a.ks {
            Some(ks) => namefit_core::rare_names::rare_sensitivity(&spec, ks)?,
            None => result.table.clone(),
        };
        if result.approximation_flagged {
            let _ = writeln!(ctx.err, "note: binomial and exact tails differ by up to {:.4}", result.max_gap);
        }
        RareOutput {
            definition,
            draw_size: spec.draw_size,
            probability: spec.probability(),
            pool_occurrences: Some(spec.pool_occurrences),
            rare_occurrences: Some(spec.rare_occurrences),
            observed_rare: Some(observed),
            tail_binomial: Some(result.tail_binomial),
            tail_exact: Some(result.tail_exact),
            max_gap: Some(result.max_gap),
            approximation_flagged: Some(result.approximation_flagged),
            rows,
        }
    };
    match ctx.cli.format {
        Format::Json => write_json(&output, &mut *ctx.out).map_err(stdout_err),
        Format::Csv => report::rare_csv(&output.rows, &mut *ctx.out).map_err(csv_err),
    }
}

struct Prepared {
    file: SuiteFile,
    data: SuiteData,
    manifest: RunManifest,
}

fn prepare_run(ctx: &mut Ctx<'_>, a: &RunArgs) -> CliResult<Prepared> {
    let file = SuiteFile::load(&a.config)?;
    let mut manifest = RunManifest::new(ctx.argv.clone(), ctx.cli.seed, RandomSource::ALGORITHM);
    manifest.config = Some(FileDigest::of(&a.config)?);
    let mut records = Vec::new();
    let paths: Vec<PathBuf> = file.corpora.iter().chain(&a.corpora).cloned().collect();
    if paths.is_empty() {
        return Err(CliError::Usage("no corpus files: list them in the config or pass --corpus".into()));
    }
    let mut seen = BTreeSet::new();
    for p in paths {
        if !seen.insert(p.clone()) {
            continue;
        }
        records.extend(ctx.load_records(&p)?);
        manifest.corpora.push(FileDigest::of(&p)?);
    }
    let data = resolve_sources(&records, &file.sources);
    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    Ok(Prepared { file, data, manifest })
}

fn cmd_suite(ctx: &mut Ctx<'_>, a: &RunArgs) -> CliResult<()> {
    let Prepared { file, data, manifest } = prepare_run(ctx, a)?;
    if file.scenarios.is_empty() {
        return Err(CliError::Data(format!("{}: no scenarios", a.config.display())));
    }
    let alpha = file.alpha.unwrap_or(ctx.cli.alpha);
    let report = parallel::run_suite(&file.scenarios, &data, alpha, ctx.cli.jobs)?;
    let matrix = report.matrix();
    let out = &a.out;
    report::matrix_csv(&matrix, create_file(&out.join("matrix.csv"))?).map_err(csv_err)?;
    write_json(&matrix, create_file(&out.join("matrix.json"))?).map_err(|e| CliError::io(out, e))?;
    report::scenarios_csv(&report, create_file(&out.join("scenarios.csv"))?).map_err(csv_err)?;
    write_json(&report, create_file(&out.join("report.json"))?).map_err(|e| CliError::io(out, e))?;
    write_manifest(&manifest, &out.join("manifest.json"))?;

    match ctx.cli.format {
        Format::Csv => report::matrix_csv(&matrix, &mut *ctx.out).map_err(csv_err)?,
        Format::Json => write_json(&matrix, &mut *ctx.out).map_err(stdout_err)?,
    }
    let b = report.benchmark;
    let _ = writeln!(
        ctx.err,
        "{} of {} tests matched expectations; benchmark {} / {} = {}",
        report.matched, report.evaluated, b.alpha, b.num_tests, b.adjusted
    );
    Ok(())
}

fn cmd_figures(ctx: &mut Ctx<'_>, a: &RunArgs) -> CliResult<()> {
    let Prepared { file, data, manifest } = prepare_run(ctx, a)?;
    if file.figures.is_empty() {
        return Err(CliError::Data(format!("{}: no figures", a.config.display())));
    }
    let root = RandomSource::new(ctx.cli.seed);
    for (i, fig) in file.figures.iter().enumerate() {
        let plot = build_figure(fig, &data, &root.child(i as u64), ctx.cli.jobs)?;
        let csv_path = a.out.join(format!("{}.csv", fig.name));
        report::plot_csv(&plot, create_file(&csv_path)?).map_err(csv_err)?;
        let json_path = a.out.join(format!("{}.json", fig.name));
        write_json(&plot, create_file(&json_path)?).map_err(|e| CliError::io(&json_path, e))?;
        let _ = writeln!(ctx.out, "{}", csv_path.display());
    }
    write_manifest(&manifest, &a.out.join("manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("-4:73"), Ok((-4, 73)));
        assert!(parse_window("73:-4").is_err());
        assert!(parse_window("73").is_err());
    }

    #[test]
    fn null_specs() {
        assert_eq!(parse_null("u4").unwrap(), vec![0.25; 4]);
        let p = parse_null("1,1,2").unwrap();
        assert_eq!(p, vec![0.25, 0.25, 0.5]);
        assert!(parse_null("u1").is_err());
    }

    #[test]
    fn table_parsing() {
        assert_eq!(parse_table("1,2;3,4").unwrap(), vec![vec![1, 2], vec![3, 4]]);
        assert!(parse_table("1,x").is_err());
    }

    #[test]
    fn distribution_to_records() {
        let d = FrequencyDistribution::from_counts([("Simon", 3), ("Judah", 1)]);
        let r = records_from_distribution(&d);
        assert_eq!(build_frequency_distribution(&r), d);
    }
}
