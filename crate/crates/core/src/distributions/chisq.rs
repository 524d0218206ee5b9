use super::gamma::{gamma_p, gamma_q};
use crate::{Error, Result};

/// P(X > x) for a central chi-square with `df` degrees of freedom.
pub fn chisq_sf(x: f64, df: u32) -> Result<f64> {
    check_args(x, df)?;
    sf_real_df(x, f64::from(df))
}

/// P(X <= x) for a central chi-square with `df` degrees of freedom.
pub fn chisq_cdf(x: f64, df: u32) -> Result<f64> {
    check_args(x, df)?;
    gamma_p(0.5 * f64::from(df), 0.5 * x)
}

pub(crate) fn sf_real_df(x: f64, df: f64) -> Result<f64> {
    gamma_q(0.5 * df, 0.5 * x)
}

fn check_args(x: f64, df: u32) -> Result<()> {
    if df == 0 {
        return Err(Error::Domain("degrees of freedom must be at least 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain("chi-square argument must be nonnegative"));
    }
    Ok(())
}

/// Inverse CDF: the `x` with P(X <= x) = `prob`.
///
/// Bisection on whichever tail is smaller, so upper quantiles keep full
/// relative precision in `1 - prob`.
pub fn chisq_quantile(prob: f64, df: u32) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Domain("quantile probability must lie in (0, 1)"));
    }
    if df == 0 {
        return Err(Error::Domain("degrees of freedom must be at least 1"));
    }
    let use_upper = prob > 0.5;
    let target = if use_upper { 1.0 - prob } else { prob };
    // g is increasing in x in both branches
    let g = |x: f64| -> Result<f64> {
        if use_upper {
            Ok(target - chisq_sf(x, df)?)
        } else {
            Ok(chisq_cdf(x, df)? - target)
        }
    };

    let mut lo = 0.0;
    let mut hi = f64::from(df).max(1.0);
    let mut guard = 0;
    while g(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Convergence("chi-square quantile bracketing"));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
