use super::chisq::{chisq_sf, sf_real_df};
use super::gamma::ln_gamma;
use crate::{Error, Result};

const TAIL_TOL: f64 = 1e-14;
const MAX_TERMS: usize = 1_000_000;

/// P(X > x) for a noncentral chi-square with `df` degrees of freedom and
/// noncentrality `lambda`.
///
/// Poisson mixture of central survival functions,
/// `sum_j Pois(j; lambda/2) * Q_{df+2j}(x)`, truncated once the remaining
/// Poisson mass (an upper bound on the neglected terms) drops below 1e-14.
pub fn noncentral_chisq_sf(x: f64, df: u32, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain("noncentrality must be finite and nonnegative"));
    }
    if lambda == 0.0 {
        return chisq_sf(x, df);
    }
    if df == 0 {
        return Err(Error::Domain("degrees of freedom must be at least 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain("chi-square argument must be nonnegative"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }

    let half = 0.5 * lambda;
    let ln_half = libm::log(half);
    let df = f64::from(df);
    let mut sum = 0.0;
    for j in 0..MAX_TERMS {
        let jf = j as f64;
        let weight = libm::exp(-half + jf * ln_half - ln_gamma(jf + 1.0));
        if weight > 0.0 {
            sum += weight * sf_real_df(x, df + 2.0 * jf)?;
        }
        if jf + 1.0 > half {
            let ratio = half / (jf + 2.0);
            let next = weight * half / (jf + 1.0);
            if next / (1.0 - ratio) < TAIL_TOL {
                return Ok(sum.clamp(0.0, 1.0));
            }
        }
    }
    Err(Error::Convergence("noncentral chi-square series"))
}
