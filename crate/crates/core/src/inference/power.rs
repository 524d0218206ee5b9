use alloc::vec::Vec;

use super::check_probability_vector;
use crate::distributions::{chisq_quantile, noncentral_chisq_sf};
use crate::{Error, Result};

/// How the noncentrality of the alternative is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Noncentrality {
    /// `n * sum (alt - null)^2 / alt`. Reproduces the dice powers 0.189 and 0.952.
    #[default]
    AlternativeWeighted,
    /// `n * sum (alt - null)^2 / null`, the classical Pearson form.
    Pearson,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerSpec {
    pub null_probs: Vec<f64>,
    pub alt_probs: Vec<f64>,
    pub n: u64,
    pub alpha: f64,
}

impl PowerSpec {
    pub fn new(null_probs: Vec<f64>, alt_probs: Vec<f64>, n: u64, alpha: f64) -> Result<Self> {
        let spec = Self { null_probs, alt_probs, n, alpha };
        spec.validate()?;
        Ok(spec)
    }

    /// Like [`PowerSpec::new`] but rescales both vectors to sum to 1 first,
    /// for inputs such as `{.133, .133, .133, .2, .2, .2}`.
    pub fn normalized(null_weights: Vec<f64>, alt_weights: Vec<f64>, n: u64, alpha: f64) -> Result<Self> {
        Self::new(rescale(null_weights)?, rescale(alt_weights)?, n, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if self.null_probs.len() != self.alt_probs.len() {
            return Err(Error::LengthMismatch { left: self.null_probs.len(), right: self.alt_probs.len() });
        }
        if self.null_probs.len() < 2 {
            return Err(Error::InvalidArgument("at least 2 categories are required".into()));
        }
        check_probability_vector(&self.null_probs)?;
        check_probability_vector(&self.alt_probs)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain("alpha must lie in (0, 1)"));
        }
        if self.n == 0 {
            return Err(Error::Domain("sample size must be positive"));
        }
        Ok(())
    }
}

fn rescale(weights: Vec<f64>) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::Domain("weights must be finite and nonnegative"));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::Domain("weights must not all be zero"));
    }
    Ok(weights.into_iter().map(|w| w / sum).collect())
}

pub fn noncentrality(spec: &PowerSpec, convention: Noncentrality) -> Result<f64> {
    spec.validate()?;
    let mut lambda = 0.0;
    for (i, (&p0, &p1)) in spec.null_probs.iter().zip(&spec.alt_probs).enumerate() {
        if p0 == p1 {
            continue;
        }
        // an empty null cell with alternative mass can never be tested
        if p0 == 0.0 {
            return Err(Error::InfiniteNoncentrality(i));
        }
        let weight = match convention {
            Noncentrality::Pearson => p0,
            Noncentrality::AlternativeWeighted => p1,
        };
        if weight == 0.0 {
            return Err(Error::InfiniteNoncentrality(i));
        }
        lambda += (p1 - p0) * (p1 - p0) / weight;
    }
    Ok(spec.n as f64 * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerReport {
    pub df: u32,
    pub lambda: f64,
    pub critical_value: f64,
    pub power: f64,
    pub convention: Noncentrality,
}

pub fn power_report(spec: &PowerSpec, convention: Noncentrality) -> Result<PowerReport> {
    let lambda = noncentrality(spec, convention)?;
    let df = (spec.null_probs.len() - 1) as u32;
    let critical_value = chisq_quantile(1.0 - spec.alpha, df)?;
    let power = noncentral_chisq_sf(critical_value, df, lambda)?;
    Ok(PowerReport { df, lambda, critical_value, power, convention })
}

/// Power with a chosen noncentrality convention.
pub fn power_with(spec: &PowerSpec, convention: Noncentrality) -> Result<f64> {
    power_report(spec, convention).map(|r| r.power)
}

/// Probability that the level-`alpha` test rejects when the sample really
/// follows the alternative.
pub fn power(spec: &PowerSpec) -> Result<f64> {
    power_with(spec, Noncentrality::default())
}
