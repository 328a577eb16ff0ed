//! Two-proportion z-test and log-space normal tail probabilities.
//!
//! All p-values are carried as `log10(p)` end to end. Read-count libraries
//! routinely produce |Z| in the hundreds, far past the point where a
//! double-precision p-value underflows to zero, and the downstream noise
//! filter compares p-value *ratios*, so the tail must stay finite and
//! accurate in log space for any Z.

use crate::error::{Error, Result};

/// Direction of the proportion change from mother library to sublibrary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Increased,
    Decreased,
    Unchanged,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Increased => "increased",
            Direction::Decreased => "decreased",
            Direction::Unchanged => "unchanged",
        }
    }

    pub fn parse(s: &str) -> Result<Direction> {
        match s {
            "increased" => Ok(Direction::Increased),
            "decreased" => Ok(Direction::Decreased),
            "unchanged" => Ok(Direction::Unchanged),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown direction '{other}'"),
            }),
        }
    }
}

/// One two-proportion z-test for a (VHH, mother, sublibrary) observation.
///
/// `x1`/`n1` are the VHH count and total reads in the mother library,
/// `x2`/`n2` the same in the sublibrary. `log10_p` is the two-sided
/// p-value in log10 space (always <= 0).
#[derive(Debug, Clone)]
pub struct ProportionTest {
    pub x1: u64,
    pub n1: u64,
    pub x2: u64,
    pub n2: u64,
    pub p_hat1: f64,
    pub p_hat2: f64,
    pub pooled: f64,
    pub z: f64,
    pub log10_p: f64,
    pub direction: Direction,
}

const LOG10_2: f64 = std::f64::consts::LOG10_2;
const LN_10: f64 = std::f64::consts::LN_10;
// ln(sqrt(pi))
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// log10 of the standard normal upper tail, `log10(P(N(0,1) > z))`.
///
/// Finite for every finite `z`; for z = 300 the result is about -19546.
/// Accuracy is limited by f64 arithmetic (absolute error in log10 well
/// under 1e-13 across the tested range).
pub fn log10_normal_sf(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("non-finite z: {z}")));
    }
    if z < 0.0 {
        // sf(z) = 1 - sf(-z); the tail at -z is <= 0.5 so the direct
        // computation loses nothing, and ln_1p keeps log10(1 - tail) sharp.
        let tail = normal_sf_upper(-z);
        return Ok((-tail).ln_1p() / LN_10);
    }
    Ok(ln_normal_sf_nonneg(z) / LN_10)
}

/// Upper tail as a plain probability, for z >= 0 paths that stay above
/// the underflow threshold (used only for the z < 0 reflection).
fn normal_sf_upper(z: f64) -> f64 {
    (ln_normal_sf_nonneg(z)).exp()
}

/// ln of the upper tail for z >= 0.
fn ln_normal_sf_nonneg(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    let x = z / std::f64::consts::SQRT_2;
    if z <= 2.0 {
        // erfc via the non-alternating confluent series for erf.
        (0.5 * erfc_series(x)).ln()
    } else {
        // ln(0.5 * erfc(x)) via the incomplete-gamma continued fraction.
        ln_erfc_cf(x) - std::f64::consts::LN_2
    }
}

/// erfc(x) for x in [0, sqrt(2)] via erf's all-positive-term series:
/// erf(x) = (2/sqrt(pi)) e^{-x^2} sum_n (2x^2)^n x / (2n+1)!!
fn erfc_series(x: f64) -> f64 {
    debug_assert!((0.0..=1.5).contains(&x));
    if x == 0.0 {
        return 1.0;
    }
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= 2.0 * x2 / (2.0 * n as f64 + 1.0);
        let next = sum + term;
        if next == sum || n > 200 {
            break;
        }
        sum = next;
    }
    let erf = 2.0 / std::f64::consts::PI.sqrt() * (-x2).exp() * sum;
    1.0 - erf
}

/// ln(erfc(x)) for x > 1.4, via the Legendre continued fraction for the
/// upper incomplete gamma function: erfc(x) = Gamma(1/2, x^2) / sqrt(pi),
/// evaluated with the modified Lentz algorithm. Never underflows.
fn ln_erfc_cf(x: f64) -> f64 {
    debug_assert!(x > 1.4);
    let a = 0.5f64;
    let gx = x * x;
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 1e-17;
    let mut b = gx + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    // Gamma(1/2, x^2) = exp(-x^2) * x * h, so
    // ln erfc = -x^2 + ln x + ln h - ln sqrt(pi)
    -gx + x.ln() + h.ln() - LN_SQRT_PI
}

/// Two-sided log10 p-value for a z-score: log10(2 * P(N > |z|)).
pub fn log10_two_sided_p(z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok((LOG10_2 + log10_normal_sf(z.abs())?).min(0.0))
}

/// The two-proportion z-test of the labeling method.
///
/// `Z = (p̂1 - p̂2) / sqrt(p(1-p)(1/n1 + 1/n2))` with the pooled
/// proportion `p = (x1+x2)/(n1+n2)`. The numerator is formed from the
/// exact integer cross product `x1*n2 - x2*n1` so nearly-equal
/// proportions do not cancel in floating point.
///
/// Degenerate pooled proportions (the VHH absent from both libraries, or
/// present in every read of both) make the denominator zero; those cases
/// return z = 0, direction unchanged, log10_p = 0.
pub fn two_proportion_z(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<ProportionTest> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidLibrary(format!(
            "library totals must be positive (n1={n1}, n2={n2})"
        )));
    }
    if x1 > n1 || x2 > n2 {
        return Err(Error::InconsistentCounts(format!(
            "count exceeds library total (x1={x1}, n1={n1}, x2={x2}, n2={n2})"
        )));
    }
    let p_hat1 = x1 as f64 / n1 as f64;
    let p_hat2 = x2 as f64 / n2 as f64;
    let total = n1 + n2;
    let successes = x1 + x2;
    let pooled = successes as f64 / total as f64;

    // Exact integer comparison of the proportions.
    let diff = (x1 as i128) * (n2 as i128) - (x2 as i128) * (n1 as i128);
    let direction = match diff.signum() {
        d if d < 0 => Direction::Increased,
        d if d > 0 => Direction::Decreased,
        _ => Direction::Unchanged,
    };

    if successes == 0 || successes == total || diff == 0 {
        return Ok(ProportionTest {
            x1,
            n1,
            x2,
            n2,
            p_hat1,
            p_hat2,
            pooled,
            z: 0.0,
            log10_p: 0.0,
            direction: if successes == 0 || successes == total {
                Direction::Unchanged
            } else {
                direction
            },
        });
    }

    let numerator = diff as f64 / (n1 as f64 * n2 as f64);
    let q = (total - successes) as f64 / total as f64;
    let variance = pooled * q * (1.0 / n1 as f64 + 1.0 / n2 as f64);
    let z = numerator / variance.sqrt();
    let log10_p = log10_two_sided_p(z)?;

    Ok(ProportionTest {
        x1,
        n1,
        x2,
        n2,
        p_hat1,
        p_hat2,
        pooled,
        z,
        log10_p,
        direction,
    })
}
