//! Equal-frequency binning of name-frequency classes.
//!
//! Bins are built from the reference distribution alone: the frequency
//! classes (names occurring exactly `f` times) are split into `k` contiguous
//! runs whose occurrence mass is as close to `total / k` as possible, in
//! the root-mean-square sense. Test samples are then routed through those
//! bins by each name's frequency in the reference.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::FrequencyDistribution;
use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyClass {
    pub frequency: u64,
    /// Number of names with exactly this frequency.
    pub names: u64,
    /// `frequency * names`.
    pub mass: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyClassProfile {
    pub classes: Vec<FrequencyClass>,
    pub total: u64,
}

impl FrequencyClassProfile {
    pub fn from_masses(classes: &[(u64, u64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(classes.len());
        let mut last = 0;
        for &(frequency, mass) in classes {
            if frequency <= last || mass == 0 || mass % frequency != 0 {
                return Err(Error::InvalidArgument(format!(
                    "invalid frequency class ({frequency}, {mass})"
                )));
            }
            last = frequency;
            out.push(FrequencyClass { frequency, names: mass / frequency, mass });
        }
        if out.is_empty() {
            return Err(Error::EmptyReference);
        }
        let total = out.iter().map(|c| c.mass).sum();
        Ok(Self { classes: out, total })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Groups the reference's names by their occurrence count.
pub fn profile(reference: &FrequencyDistribution) -> Result<FrequencyClassProfile> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let mut names_per_freq = alloc::collections::BTreeMap::<u64, u64>::new();
    for (_, c) in reference.iter() {
        *names_per_freq.entry(c).or_insert(0) += 1;
    }
    let classes = names_per_freq
        .into_iter()
        .map(|(frequency, names)| FrequencyClass { frequency, names, mass: frequency * names })
        .collect();
    Ok(FrequencyClassProfile { classes, total: reference.total() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bin {
    pub lo: u64,
    /// Inclusive upper frequency; `None` for the open top bin.
    pub hi: Option<u64>,
    pub label: String,
    pub reference_mass: u64,
}

impl Bin {
    pub fn contains(&self, frequency: u64) -> bool {
        frequency >= self.lo && self.hi.is_none_or(|h| frequency <= h)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinSpec {
    pub bins: Vec<Bin>,
    pub reference_total: u64,
    pub rmse: f64,
}

impl BinSpec {
    pub fn k(&self) -> usize {
        self.bins.len()
    }

    /// Bin holding names of the given reference frequency. Frequencies below
    /// the first bin (including 0, i.e. unattested names) go to bin 0.
    pub fn bin_index(&self, frequency: u64) -> usize {
        self.bins
            .iter()
            .rposition(|b| b.lo <= frequency)
            .unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<String> {
        self.bins.iter().map(|b| b.label.clone()).collect()
    }

    pub fn reference_probs(&self) -> Vec<f64> {
        let t = self.reference_total as f64;
        self.bins.iter().map(|b| b.reference_mass as f64 / t).collect()
    }
}

/// Squared deviation of one bin from the equal share, scaled by k^2 so it
/// stays an integer: (k * mass - total)^2.
fn scaled_cost(mass: u64, k: usize, total: u64) -> u128 {
    let d = i128::from(mass) * k as i128 - i128::from(total);
    (d * d) as u128
}

pub fn rmse_of(masses: &[u64], total: u64) -> f64 {
    let k = masses.len() as f64;
    let share = total as f64 / k;
    let ss: f64 = masses.iter().map(|&m| (m as f64 - share) * (m as f64 - share)).sum();
    libm::sqrt(ss / k)
}

/// RMSE-minimizing partition of the classes into `k` contiguous bins.
///
/// Exact dynamic program over an integer objective. Among optimal partitions
/// the one with the narrowest low bins wins (lexicographically smallest
/// sequence of upper class indices).
pub fn compute_bins(profile: &FrequencyClassProfile, k: usize) -> Result<BinSpec> {
    let m = profile.classes.len();
    if k < 2 {
        return Err(Error::TooFewBins(k));
    }
    if k > m {
        return Err(Error::TooManyBins { k, classes: m });
    }
    let total = profile.total;
    let mut prefix = vec![0u64; m + 1];
    for (i, c) in profile.classes.iter().enumerate() {
        prefix[i + 1] = prefix[i] + c.mass;
    }
    let mass = |a: usize, b: usize| prefix[b] - prefix[a];

    // best[j][i]: min cost of covering classes i..m with j bins
    const INF: u128 = u128::MAX;
    let mut best = vec![vec![INF; m + 1]; k + 1];
    best[0][m] = 0;
    for j in 1..=k {
        for i in (0..m).rev() {
            // leave at least j-1 classes for the remaining bins
            let mut cur = INF;
            for e in (i + 1)..=(m + 1 - j) {
                let rest = best[j - 1][e];
                if rest == INF {
                    continue;
                }
                let c = scaled_cost(mass(i, e), k, total) + rest;
                if c < cur {
                    cur = c;
                }
            }
            best[j][i] = cur;
        }
    }

    let mut ends = Vec::with_capacity(k);
    let mut i = 0;
    for j in (1..=k).rev() {
        let target = best[j][i];
        let e = ((i + 1)..=(m + 1 - j))
            .find(|&e| {
                let rest = best[j - 1][e];
                rest != INF && scaled_cost(mass(i, e), k, total) + rest == target
            })
            .expect("optimal split exists");
        ends.push(e);
        i = e;
    }
    Ok(spec_from_ends(profile, &ends))
}

/// Builds the bin spec for a partition given as exclusive class end indices.
pub fn spec_from_ends(profile: &FrequencyClassProfile, ends: &[usize]) -> BinSpec {
    let classes = &profile.classes;
    let k = ends.len();
    let mut bins = Vec::with_capacity(k);
    let mut start = 0;
    for (b, &end) in ends.iter().enumerate() {
        let lo = classes[start].frequency;
        let hi = if b + 1 == k { None } else { Some(classes[end].frequency - 1) };
        let label = match hi {
            None => format!("{lo}+"),
            Some(h) if h == lo => format!("{lo}"),
            Some(h) => format!("{lo}-{h}"),
        };
        let reference_mass = classes[start..end].iter().map(|c| c.mass).sum();
        bins.push(Bin { lo, hi, label, reference_mass });
        start = end;
    }
    let masses: Vec<u64> = bins.iter().map(|b| b.reference_mass).collect();
    BinSpec { rmse: rmse_of(&masses, profile.total), bins, reference_total: profile.total }
}

/// Observed and expected counts of a test sample in each bin.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinnedCounts {
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub n: u64,
}

/// Routes each test occurrence to the bin of its name's frequency in the
/// reference. Names missing from the reference count as frequency 1.
pub fn bin_counts(test: &FrequencyDistribution, reference: &FrequencyDistribution, spec: &BinSpec) -> BinnedCounts {
    debug_assert_eq!(spec.reference_total, reference.total());
    let mut observed = vec![0u64; spec.k()];
    for (name, c) in test.iter() {
        let f = reference.count(name).max(1);
        observed[spec.bin_index(f)] += c;
    }
    let n = test.total();
    let expected = spec.reference_probs().iter().map(|p| p * n as f64).collect();
    BinnedCounts { observed, expected, n }
}

/// Result of the expected-count conditions for the chi-square approximation:
/// no cell below 1 expected, and at most 20% of cells below 5.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    pub cells: usize,
    pub min_expected: f64,
    pub cells_below_five: usize,
    pub min_expected_ok: bool,
    pub small_share_ok: bool,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.min_expected_ok && self.small_share_ok
    }

    pub fn small_share(&self) -> f64 {
        if self.cells == 0 {
            0.0
        } else {
            self.cells_below_five as f64 / self.cells as f64
        }
    }
}

pub fn check_conditions(expected: &[f64]) -> ConditionReport {
    let cells = expected.len();
    let min_expected = expected.iter().copied().fold(f64::INFINITY, f64::min);
    let cells_below_five = expected.iter().filter(|&&e| e < 5.0).count();
    ConditionReport {
        cells,
        min_expected,
        cells_below_five,
        min_expected_ok: min_expected >= 1.0,
        // share <= 20%, compared without rounding
        small_share_ok: cells_below_five * 5 <= cells,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveBinning {
    pub spec: BinSpec,
    pub counts: BinnedCounts,
    pub conditions: ConditionReport,
    pub requested_k: usize,
    /// Bin counts tried, in order; the last one is the one used.
    pub attempts: Vec<usize>,
}

/// Bins with `k`, reducing `k` by one while the test conditions fail, down
/// to 2 bins. `k` is first capped at the number of frequency classes.
pub fn bin_with_fallback(
    test: &FrequencyDistribution,
    reference: &FrequencyDistribution,
    k: usize,
) -> Result<AdaptiveBinning> {
    let prof = profile(reference)?;
    if k < 2 {
        return Err(Error::TooFewBins(k));
    }
    let mut current = k.min(prof.len());
    if current < 2 {
        return Err(Error::TooManyBins { k: 2, classes: prof.len() });
    }
    let mut attempts = Vec::new();
    loop {
        attempts.push(current);
        let spec = compute_bins(&prof, current)?;
        let counts = bin_counts(test, reference, &spec);
        let conditions = check_conditions(&counts.expected);
        if conditions.passes() {
            return Ok(AdaptiveBinning { spec, counts, conditions, requested_k: k, attempts });
        }
        if current == 2 {
            return Err(Error::ConditionsUnmet);
        }
        current -= 1;
    }
}
