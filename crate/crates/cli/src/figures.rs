//! Plot datasets for configured figures.

use namefit_core::binning::{bin_counts, compute_bins, profile};
use namefit_core::corpus::{build_frequency_distribution, build_origin_distribution, OccurrenceRecord, OriginCategory};
use namefit_core::distributions::RandomSource;
use namefit_core::inference::SuiteData;
use namefit_core::intervals::{figure_series, origin_counts, PlotDataset, SeriesInput, TopNamesProfile, DEFAULT_LEVEL, DEFAULT_REPLICATES};
use namefit_core::Error as CoreError;

use crate::config::{FigureKind, FigureSpec};
use crate::error::{CliError, CliResult};
use crate::parallel;

fn source<'a>(data: &'a SuiteData, tag: &str) -> CliResult<&'a [OccurrenceRecord]> {
    data.get(tag)
        .map(Vec::as_slice)
        .ok_or_else(|| CoreError::UnknownSource(tag.to_string()).into())
}

/// Builds one figure. Bootstrap replicates use `rng`, so the result is fixed
/// by the seed whatever `jobs` is.
pub fn build_figure(spec: &FigureSpec, data: &SuiteData, rng: &RandomSource, jobs: usize) -> CliResult<PlotDataset> {
    let level = spec.level.unwrap_or(DEFAULT_LEVEL);
    let reference_records = source(data, &spec.reference)?;
    if spec.uniform.is_some() && spec.kind != FigureKind::Bins {
        return Err(CliError::Data(format!(
            "figure `{}`: a uniform series needs kind \"bins\"",
            spec.name
        )));
    }
    let mut series = Vec::new();
    let (labels, ref_counts, ref_total) = match spec.kind {
        FigureKind::Bins => {
            let reference = build_frequency_distribution(reference_records);
            let bins = compute_bins(&profile(&reference)?, spec.k)?;
            for tag in &spec.tests {
                let test = build_frequency_distribution(source(data, tag)?);
                let counts = bin_counts(&test, &reference, &bins);
                series.push(SeriesInput::Counts { name: tag.clone(), counts: counts.observed, n: counts.n });
            }
            if let Some(u) = &spec.uniform {
                let replicates = u.replicates.unwrap_or(DEFAULT_REPLICATES);
                let intervals = parallel::bootstrap_ci(&reference, &bins, u.draw_size, replicates, rng, level, jobs)?;
                series.push(SeriesInput::Intervals { name: u.name.clone(), intervals });
            }
            let masses = bins.bins.iter().map(|b| b.reference_mass).collect();
            (bins.labels(), masses, reference.total())
        }
        FigureKind::Origin => {
            let reference = build_origin_distribution(reference_records, spec.merge_semitic)?.distribution;
            let cats: Vec<OriginCategory> = reference.categories().collect();
            for tag in &spec.tests {
                let test = build_origin_distribution(source(data, tag)?, spec.merge_semitic)?.distribution;
                series.push(SeriesInput::Counts {
                    name: tag.clone(),
                    counts: origin_counts(&test, &cats),
                    n: test.total(),
                });
            }
            let labels = cats.iter().map(|c| c.label().to_string()).collect();
            (labels, origin_counts(&reference, &cats), reference.total())
        }
        FigureKind::TopNames => {
            let reference = build_frequency_distribution(reference_records);
            let top = TopNamesProfile::new(&reference, spec.top);
            for tag in &spec.tests {
                let test = build_frequency_distribution(source(data, tag)?);
                series.push(SeriesInput::Counts { name: tag.clone(), counts: top.counts(&test), n: test.total() });
            }
            (top.labels(), top.counts(&reference), reference.total())
        }
    };
    Ok(figure_series(&labels, &ref_counts, ref_total, &series, level)?)
}
