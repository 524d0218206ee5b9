//! Probability kernels: central and noncentral chi-square, binomial,
//! hypergeometric, normal quantile, and a seedable random source.
//!
//! All functions are pure. Results are linear-space probabilities; log space
//! is used internally wherever terms could overflow.

mod chisq;
mod discrete;
mod gamma;
mod noncentral;
mod normal;
mod random;

pub use chisq::{chisq_cdf, chisq_quantile, chisq_sf};
pub use discrete::{binom_cdf, binom_pmf, hypergeom_cdf, hypergeom_pmf};
pub use gamma::{gamma_p, gamma_q, ln_gamma};
pub use noncentral::noncentral_chisq_sf;
pub use normal::{normal_cdf, normal_quantile};
pub use random::RandomSource;

use crate::{Error, Result};

/// Degrees of freedom and noncentrality of a chi-square law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChiSquareParams {
    pub df: u32,
    pub lambda: f64,
}

impl ChiSquareParams {
    pub fn central(df: u32) -> Result<Self> {
        Self::new(df, 0.0)
    }

    pub fn new(df: u32, lambda: f64) -> Result<Self> {
        if df == 0 {
            return Err(Error::Domain("degrees of freedom must be at least 1"));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain("noncentrality must be finite and nonnegative"));
        }
        Ok(Self { df, lambda })
    }

    pub fn is_central(&self) -> bool {
        self.lambda == 0.0
    }

    /// P(X > x).
    pub fn sf(&self, x: f64) -> Result<f64> {
        if self.is_central() {
            chisq_sf(x, self.df)
        } else {
            noncentral_chisq_sf(x, self.df, self.lambda)
        }
    }
}
