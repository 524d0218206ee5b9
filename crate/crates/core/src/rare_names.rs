//! Rare-name tail analysis.
//!
//! Given a sample of `n` occurrences drawn from a pool of `N` reference
//! occurrences, `K` of which belong to rare names, how likely is it to see
//! `k` or fewer rare occurrences? The exact answer is hypergeometric; the
//! binomial with `p = K / N` is the usual approximation. Both are reported.

use alloc::vec::Vec;

use crate::corpus::FrequencyDistribution;
use crate::distributions::{binom_cdf, hypergeom_cdf};
use crate::{Error, Result};

/// Gap between the binomial and exact tails above which a result is flagged.
pub const APPROXIMATION_FLAG: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RareDefinition {
    /// Reference frequency exactly 1.
    Once,
    /// Reference frequency 1 or 2.
    OnceOrTwice,
}

impl RareDefinition {
    pub fn max_frequency(self) -> u64 {
        match self {
            RareDefinition::Once => 1,
            RareDefinition::OnceOrTwice => 2,
        }
    }

    pub fn is_rare(self, reference_frequency: u64) -> bool {
        reference_frequency <= self.max_frequency()
    }
}

/// Test occurrences whose name is rare in the reference. Names absent from
/// the reference count as rare.
pub fn count_rare(test: &FrequencyDistribution, reference: &FrequencyDistribution, definition: RareDefinition) -> u64 {
    test.iter()
        .filter(|(name, _)| definition.is_rare(reference.count(name)))
        .map(|(_, c)| c)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RareSpec {
    pub definition: RareDefinition,
    /// Occurrences in the pool (N).
    pub pool_occurrences: u64,
    /// Rare occurrences in the pool (K).
    pub rare_occurrences: u64,
    /// Sample size (n).
    pub draw_size: u64,
}

impl RareSpec {
    pub fn new(definition: RareDefinition, pool_occurrences: u64, rare_occurrences: u64, draw_size: u64) -> Result<Self> {
        if rare_occurrences > pool_occurrences {
            return Err(Error::Domain("rare occurrences exceed the pool"));
        }
        if draw_size > pool_occurrences {
            return Err(Error::Domain("draw size exceeds the pool"));
        }
        if pool_occurrences == 0 {
            return Err(Error::Domain("empty pool"));
        }
        Ok(Self { definition, pool_occurrences, rare_occurrences, draw_size })
    }

    /// Pool taken from a reference distribution: N is its total, K the
    /// occurrences of its rare names.
    pub fn from_reference(reference: &FrequencyDistribution, definition: RareDefinition, draw_size: u64) -> Result<Self> {
        let rare = reference
            .iter()
            .filter(|(_, c)| definition.is_rare(*c))
            .map(|(_, c)| c)
            .sum();
        Self::new(definition, reference.total(), rare, draw_size)
    }

    pub fn probability(&self) -> f64 {
        self.rare_occurrences as f64 / self.pool_occurrences as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RareRow {
    pub k: u64,
    pub tail_binomial: f64,
    pub tail_exact: f64,
}

impl RareRow {
    pub fn gap(&self) -> f64 {
        (self.tail_binomial - self.tail_exact).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RareResult {
    pub spec: RareSpec,
    pub observed_rare: u64,
    pub tail_binomial: f64,
    pub tail_exact: f64,
    /// Tails for every k' in 0..=n.
    pub table: Vec<RareRow>,
    pub max_gap: f64,
    pub approximation_flagged: bool,
}

fn row(spec: &RareSpec, k: u64) -> Result<RareRow> {
    if k > spec.draw_size {
        return Err(Error::Domain("rare count exceeds draw size"));
    }
    Ok(RareRow {
        k,
        tail_binomial: binom_cdf(k, spec.draw_size, spec.probability())?,
        tail_exact: hypergeom_cdf(k, spec.pool_occurrences, spec.rare_occurrences, spec.draw_size)?,
    })
}

/// P(X <= k) under both sampling models, plus the full table.
pub fn rare_tail(spec: &RareSpec, k: u64) -> Result<RareResult> {
    let at = row(spec, k)?;
    let table = (0..=spec.draw_size).map(|j| row(spec, j)).collect::<Result<Vec<_>>>()?;
    let max_gap = table.iter().map(RareRow::gap).fold(0.0, f64::max);
    Ok(RareResult {
        spec: *spec,
        observed_rare: k,
        tail_binomial: at.tail_binomial,
        tail_exact: at.tail_exact,
        table,
        max_gap,
        approximation_flagged: max_gap > APPROXIMATION_FLAG,
    })
}

/// Tails for a list of candidate rare counts, e.g. as contested names are
/// put back into the sample.
pub fn rare_sensitivity(spec: &RareSpec, k_values: &[u64]) -> Result<Vec<RareRow>> {
    k_values.iter().map(|&k| row(spec, k)).collect()
}

/// Binomial tails P(X <= k) for an explicit success probability.
pub fn binomial_tails(draw_size: u64, p: f64, k_values: &[u64]) -> Result<Vec<f64>> {
    k_values.iter().map(|&k| binom_cdf(k, draw_size, p)).collect()
}

/// Solves for the `p` with P(X <= k) = `target` under Binomial(n, p).
pub fn calibrate_probability(draw_size: u64, k: u64, target: f64) -> Result<f64> {
    if k >= draw_size {
        return Err(Error::Domain("calibration needs k < n"));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain("target probability must lie in (0, 1)"));
    }
    // cdf falls from 1 to 0 as p goes from 0 to 1
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binom_cdf(k, draw_size, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
