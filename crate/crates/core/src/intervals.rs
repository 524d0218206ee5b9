//! Per-category confidence intervals for plotting.
//!
//! These intervals are a visual aid and each one is computed independently.
//! Whether a sample fits is decided by the formal test, which weighs all
//! categories at once.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::binning::BinSpec;
use crate::corpus::{FrequencyDistribution, OriginCategory, OriginDistribution};
use crate::distributions::{normal_quantile, RandomSource};
use crate::{Error, Result};

pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_REPLICATES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CiMethod {
    Wald,
    BootstrapPercentile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfidenceInterval {
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: CiMethod,
    /// False when no interval can be formed (Wald at a count of 0 or n).
    pub defined: bool,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.defined && self.lower <= value && value <= self.upper
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain("confidence level must lie in (0, 1)"));
    }
    Ok(())
}

/// Wald interval `p +/- z * sqrt(p (1 - p) / n)`, clipped to [0, 1].
pub fn wald_ci(count: u64, n: u64, level: f64) -> Result<ConfidenceInterval> {
    check_level(level)?;
    if n == 0 {
        return Err(Error::Domain("sample size must be positive"));
    }
    if count > n {
        return Err(Error::Domain("count exceeds sample size"));
    }
    let p = count as f64 / n as f64;
    if count == 0 || count == n {
        return Ok(ConfidenceInterval {
            center: p,
            lower: p,
            upper: p,
            level,
            method: CiMethod::Wald,
            defined: false,
        });
    }
    let z = normal_quantile(0.5 * (1.0 + level))?;
    let half = z * libm::sqrt(p * (1.0 - p) / n as f64);
    Ok(ConfidenceInterval {
        center: p,
        lower: (p - half).max(0.0),
        upper: (p + half).min(1.0),
        level,
        method: CiMethod::Wald,
        defined: true,
    })
}

/// Bootstrap for a sample that picks distinct reference names uniformly at
/// random (each name once, equal probability), without replacement.
///
/// Replicate `r` draws from `source.child(r)`, so results do not depend on
/// how replicates are spread across workers.
#[derive(Debug, Clone)]
pub struct UniformBootstrap {
    name_bins: Vec<usize>,
    bins: usize,
    draw_size: usize,
}

impl UniformBootstrap {
    pub fn new(reference: &FrequencyDistribution, spec: &BinSpec, draw_size: usize) -> Result<Self> {
        let distinct = reference.distinct();
        if draw_size > distinct {
            return Err(Error::DrawTooLarge { draw: draw_size, distinct });
        }
        if draw_size == 0 {
            return Err(Error::Domain("draw size must be positive"));
        }
        let name_bins = reference.iter().map(|(_, f)| spec.bin_index(f)).collect();
        Ok(Self { name_bins, bins: spec.k(), draw_size })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Bin proportions of one replicate; they sum to 1.
    pub fn replicate(&self, source: &RandomSource, index: u64) -> Vec<f64> {
        let mut rng = source.child(index).rng();
        let mut counts = vec![0u64; self.bins];
        for i in rand::seq::index::sample(&mut rng, self.name_bins.len(), self.draw_size) {
            counts[self.name_bins[i]] += 1;
        }
        let d = self.draw_size as f64;
        counts.into_iter().map(|c| c as f64 / d).collect()
    }
}

/// Linear interpolation between order statistics (sorted input).
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile intervals per bin over a set of replicates (one proportion
/// vector per replicate). The center is the mean replicate proportion.
pub fn percentile_intervals(replicates: &[Vec<f64>], level: f64) -> Result<Vec<ConfidenceInterval>> {
    check_level(level)?;
    let first = replicates.first().ok_or(Error::Domain("at least one replicate is required"))?;
    let bins = first.len();
    let b = replicates.len();
    let tail = 0.5 * (1.0 - level);
    let mut out = Vec::with_capacity(bins);
    let mut column = Vec::with_capacity(b);
    for j in 0..bins {
        column.clear();
        column.extend(replicates.iter().map(|r| r[j]));
        let center = column.iter().sum::<f64>() / b as f64;
        column.sort_by(f64::total_cmp);
        out.push(ConfidenceInterval {
            center,
            lower: percentile_sorted(&column, tail),
            upper: percentile_sorted(&column, 1.0 - tail),
            level,
            method: CiMethod::BootstrapPercentile,
            defined: true,
        });
    }
    Ok(out)
}

/// Sequential driver: `replicates` replicates, then per-bin percentile
/// intervals.
pub fn bootstrap_uniform_ci(
    reference: &FrequencyDistribution,
    spec: &BinSpec,
    draw_size: usize,
    replicates: usize,
    source: &RandomSource,
    level: f64,
) -> Result<Vec<ConfidenceInterval>> {
    check_level(level)?;
    if replicates == 0 {
        return Err(Error::Domain("at least one replicate is required"));
    }
    let boot = UniformBootstrap::new(reference, spec, draw_size)?;
    let reps: Vec<Vec<f64>> = (0..replicates as u64).map(|r| boot.replicate(source, r)).collect();
    percentile_intervals(&reps, level)
}

/// One test series in a plot.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesInput {
    /// Raw category counts out of `n` occurrences; Wald intervals are used.
    Counts { name: String, counts: Vec<u64>, n: u64 },
    /// Precomputed intervals, e.g. from the uniform bootstrap.
    Intervals { name: String, intervals: Vec<ConfidenceInterval> },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlotRow {
    pub series: String,
    pub bin_label: String,
    pub center: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub defined: bool,
}

/// Data behind a bar-plus-intervals figure. Reference rows carry the bar
/// height in `center` and no interval.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlotDataset {
    pub labels: Vec<String>,
    pub reference: Vec<f64>,
    pub rows: Vec<PlotRow>,
}

pub const REFERENCE_SERIES: &str = "reference";

pub fn figure_series(
    labels: &[String],
    reference_counts: &[u64],
    reference_total: u64,
    series: &[SeriesInput],
    level: f64,
) -> Result<PlotDataset> {
    if labels.len() != reference_counts.len() {
        return Err(Error::LengthMismatch { left: labels.len(), right: reference_counts.len() });
    }
    if reference_total == 0 {
        return Err(Error::EmptyReference);
    }
    let reference: Vec<f64> = reference_counts.iter().map(|&c| c as f64 / reference_total as f64).collect();
    let mut rows = Vec::new();
    for (label, &p) in labels.iter().zip(&reference) {
        rows.push(PlotRow {
            series: REFERENCE_SERIES.to_string(),
            bin_label: label.clone(),
            center: p,
            lower: None,
            upper: None,
            defined: false,
        });
    }
    for s in series {
        let (name, intervals) = match s {
            SeriesInput::Counts { name, counts, n } => {
                if counts.len() != labels.len() {
                    return Err(Error::LengthMismatch { left: labels.len(), right: counts.len() });
                }
                let cis = counts.iter().map(|&c| wald_ci(c, *n, level)).collect::<Result<Vec<_>>>()?;
                (name, cis)
            }
            SeriesInput::Intervals { name, intervals } => {
                if intervals.len() != labels.len() {
                    return Err(Error::LengthMismatch { left: labels.len(), right: intervals.len() });
                }
                (name, intervals.clone())
            }
        };
        for (label, ci) in labels.iter().zip(intervals) {
            rows.push(PlotRow {
                series: name.clone(),
                bin_label: label.clone(),
                center: ci.center,
                lower: ci.defined.then_some(ci.lower),
                upper: ci.defined.then_some(ci.upper),
                defined: ci.defined,
            });
        }
    }
    Ok(PlotDataset { labels: labels.to_vec(), reference, rows })
}

/// Category counts of an origin distribution, in the given category order.
pub fn origin_counts(dist: &OriginDistribution, categories: &[OriginCategory]) -> Vec<u64> {
    categories.iter().map(|&c| dist.count(c)).collect()
}

pub const RARE_LABEL: &str = "rare";

/// The most frequent reference names plus a column for rare names (those
/// occurring once in the reference, or not at all).
#[derive(Debug, Clone, PartialEq)]
pub struct TopNamesProfile {
    pub names: Vec<String>,
    reference: FrequencyDistribution,
}

impl TopNamesProfile {
    pub fn new(reference: &FrequencyDistribution, top: usize) -> Self {
        let names = reference
            .sorted_by_count()
            .into_iter()
            .take(top)
            .map(|(n, _)| n.to_string())
            .collect();
        Self { names, reference: reference.clone() }
    }

    pub fn labels(&self) -> Vec<String> {
        let mut l = self.names.clone();
        l.push(RARE_LABEL.to_string());
        l
    }

    /// Per-label counts of a sample. These do not sum to the sample total;
    /// proportions are taken against the full sample.
    pub fn counts(&self, sample: &FrequencyDistribution) -> Vec<u64> {
        let mut out: Vec<u64> = self.names.iter().map(|n| sample.count(n)).collect();
        let rare = sample
            .iter()
            .filter(|(n, _)| self.reference.count(n) <= 1)
            .map(|(_, c)| c)
            .sum();
        out.push(rare);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::{compute_bins, profile};
    use alloc::format;

    #[test]
    fn wald_half_width() {
        let ci = wald_ci(50, 100, 0.95).unwrap();
        assert!((ci.lower - 0.402).abs() < 1e-3);
        assert!((ci.upper - 0.598).abs() < 1e-3);
        assert!((ci.width() / 2.0 - 1.959963984540054 * 0.05).abs() < 1e-12);
        assert!(ci.defined);
    }

    #[test]
    fn wald_degenerate() {
        let zero = wald_ci(0, 52, 0.95).unwrap();
        assert!(!zero.defined);
        assert_eq!(zero.center, 0.0);
        assert!(!wald_ci(52, 52, 0.95).unwrap().defined);
        assert!(wald_ci(53, 52, 0.95).is_err());
        assert!(wald_ci(1, 0, 0.95).is_err());
    }

    #[test]
    fn wald_sqrt_n_law() {
        let a = wald_ci(50, 100, 0.95).unwrap();
        let b = wald_ci(200, 400, 0.95).unwrap();
        assert!((b.width() / a.width() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wald_clips() {
        let ci = wald_ci(1, 5, 0.99).unwrap();
        assert_eq!(ci.lower, 0.0);
    }

    fn reference() -> FrequencyDistribution {
        let mut pairs: Vec<(String, u64)> = (0..200).map(|i| (format!("a{i}"), 1)).collect();
        pairs.extend((0..100).map(|i| (format!("b{i}"), 3)));
        pairs.extend((0..40).map(|i| (format!("c{i}"), 10)));
        FrequencyDistribution::from_counts(pairs)
    }

    #[test]
    fn bootstrap_single_replicate_is_degenerate() {
        let r = reference();
        let spec = compute_bins(&profile(&r).unwrap(), 3).unwrap();
        let src = RandomSource::new(11);
        let cis = bootstrap_uniform_ci(&r, &spec, 52, 1, &src, 0.95).unwrap();
        let rep = UniformBootstrap::new(&r, &spec, 52).unwrap().replicate(&src, 0);
        for (ci, p) in cis.iter().zip(&rep) {
            assert_eq!(ci.lower, *p);
            assert_eq!(ci.upper, *p);
            assert_eq!(ci.center, *p);
        }
    }

    #[test]
    fn bootstrap_full_draw_has_zero_width() {
        let r = reference();
        let spec = compute_bins(&profile(&r).unwrap(), 3).unwrap();
        let cis = bootstrap_uniform_ci(&r, &spec, r.distinct(), 20, &RandomSource::new(3), 0.95).unwrap();
        for ci in cis {
            assert!(ci.width().abs() < 1e-15);
        }
    }

    #[test]
    fn bootstrap_errors() {
        let r = reference();
        let spec = compute_bins(&profile(&r).unwrap(), 3).unwrap();
        assert_eq!(
            bootstrap_uniform_ci(&r, &spec, 341, 10, &RandomSource::new(1), 0.95),
            Err(Error::DrawTooLarge { draw: 341, distinct: 340 })
        );
    }

    #[test]
    fn bootstrap_replicates_sum_to_one_and_levels_nest() {
        let r = reference();
        let spec = compute_bins(&profile(&r).unwrap(), 3).unwrap();
        let boot = UniformBootstrap::new(&r, &spec, 52).unwrap();
        let src = RandomSource::new(99);
        let reps: Vec<Vec<f64>> = (0..500).map(|i| boot.replicate(&src, i)).collect();
        for rep in &reps {
            assert!((rep.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let narrow = percentile_intervals(&reps, 0.90).unwrap();
        let wide = percentile_intervals(&reps, 0.99).unwrap();
        let centers: f64 = narrow.iter().map(|c| c.center).sum();
        assert!((centers - 1.0).abs() < 1e-9);
        for (n, w) in narrow.iter().zip(&wide) {
            assert!(w.lower <= n.lower && n.upper <= w.upper);
        }
    }

    #[test]
    fn figure_rows() {
        let labels: Vec<String> = ["1", "2-5", "6+"].iter().map(|s| s.to_string()).collect();
        let ds = figure_series(
            &labels,
            &[10, 20, 30],
            60,
            &[SeriesInput::Counts { name: "sample".into(), counts: vec![0, 5, 5], n: 10 }],
            0.95,
        )
        .unwrap();
        assert_eq!(ds.rows.len(), 6);
        assert!((ds.reference[2] - 0.5).abs() < 1e-15);
        let first = &ds.rows[3];
        assert_eq!(first.series, "sample");
        assert_eq!(first.center, 0.0);
        assert!(!first.defined);
        assert!(first.lower.is_none());
    }

    #[test]
    fn top_names_with_rare_column() {
        let r = FrequencyDistribution::from_counts([("Simon", 20), ("Joseph", 15), ("Eleazar", 12), ("Aeneas", 1), ("Timon", 1)]);
        let p = TopNamesProfile::new(&r, 2);
        assert_eq!(p.labels(), vec!["Simon", "Joseph", "rare"]);
        let sample = FrequencyDistribution::from_counts([("Simon", 3), ("Timon", 1), ("Zenon", 1), ("Eleazar", 2)]);
        assert_eq!(p.counts(&sample), vec![3, 0, 2]);
    }
}
