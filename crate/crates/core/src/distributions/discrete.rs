//! Binomial and hypergeometric probabilities.
//!
//! Point masses use Loader's saddle-point expansion (Stirling remainder plus
//! the `bd0` deviance term), which keeps relative error near machine
//! precision for large `n` where a plain log-gamma difference would not.
//! Cumulative sums add terms smallest first.

use alloc::vec::Vec;

use super::gamma::ln_gamma;
use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// ln(n!) - ((n + 1/2) ln n - n + ln sqrt(2 pi))
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * libm::log(n) + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term x ln(x/np) + np - x, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * libm::log(x / np) + np - x
    }
}

fn dbinom_raw(x: f64, n: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0.0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    if x == 0.0 {
        if n == 0.0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(n, n * q) - n * p } else { n * libm::log(q) };
        return libm::exp(lc);
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(n, n * p) - n * q } else { n * libm::log(p) };
        return libm::exp(lc);
    }
    if x < 0.0 || x > n {
        return 0.0;
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
    let lf = LN_2PI + libm::log(x) + libm::log1p(-x / n);
    libm::exp(lc - 0.5 * lf)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain("probability must lie in [0, 1]"));
    }
    Ok(())
}

fn sum_ascending(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().min(1.0)
}

/// P(X = k) for X ~ Binomial(n, p).
pub fn binom_pmf(k: u64, n: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    if k > n {
        return Err(Error::Domain("binomial outcome exceeds trials"));
    }
    Ok(dbinom_raw(k as f64, n as f64, p, 1.0 - p))
}

/// P(X <= k) for X ~ Binomial(n, p).
pub fn binom_cdf(k: u64, n: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    if k > n {
        return Err(Error::Domain("binomial outcome exceeds trials"));
    }
    if k == n {
        return Ok(1.0);
    }
    let (nf, q) = (n as f64, 1.0 - p);
    let terms = (0..=k).map(|i| dbinom_raw(i as f64, nf, p, q)).collect();
    Ok(sum_ascending(terms))
}

fn check_hypergeom(population: u64, successes: u64, draws: u64) -> Result<()> {
    if successes > population {
        return Err(Error::Domain("successes exceed population"));
    }
    if draws > population {
        return Err(Error::Domain("draws exceed population"));
    }
    Ok(())
}

fn dhyper(x: u64, successes: u64, failures: u64, draws: u64) -> f64 {
    let lo = draws.saturating_sub(failures);
    let hi = draws.min(successes);
    if x < lo || x > hi {
        return 0.0;
    }
    if draws == 0 {
        return 1.0;
    }
    let total = (successes + failures) as f64;
    let p = draws as f64 / total;
    let q = (total - draws as f64) / total;
    let p1 = dbinom_raw(x as f64, successes as f64, p, q);
    let p2 = dbinom_raw((draws - x) as f64, failures as f64, p, q);
    let p3 = dbinom_raw(draws as f64, total, p, q);
    p1 * p2 / p3
}

/// P(X = k) when drawing `draws` items without replacement from a population
/// of `population` items, `successes` of which are marked.
pub fn hypergeom_pmf(k: u64, population: u64, successes: u64, draws: u64) -> Result<f64> {
    check_hypergeom(population, successes, draws)?;
    Ok(dhyper(k, successes, population - successes, draws))
}

/// P(X <= k) for the hypergeometric law of [`hypergeom_pmf`].
pub fn hypergeom_cdf(k: u64, population: u64, successes: u64, draws: u64) -> Result<f64> {
    check_hypergeom(population, successes, draws)?;
    let failures = population - successes;
    let lo = draws.saturating_sub(failures);
    let hi = draws.min(successes);
    if k < lo {
        return Ok(0.0);
    }
    if k >= hi {
        return Ok(1.0);
    }
    let terms = (lo..=k).map(|i| dhyper(i, successes, failures, draws)).collect();
    Ok(sum_ascending(terms))
}
