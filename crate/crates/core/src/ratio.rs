//! Exact rational arithmetic helpers.
//!
//! Probabilities are carried as exact `BigRational` values end to end, so
//! every bound the harness checks is an exact comparison rather than a
//! floating-point one. Base-2 logarithms are only taken at the reporting
//! boundary, where an `f64` is good enough.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact probability / weight type used throughout the crate.
pub type Ratio = BigRational;

/// 2^k as an exact rational; `k` may be negative.
pub fn pow2(k: i64) -> Ratio {
    let mag = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Ratio::from_integer(mag)
    } else {
        Ratio::new(BigInt::one(), mag)
    }
}

/// Smallest integer `c` with `r <= 2^c`. Panics if `r <= 0`.
pub fn ceil_log2(r: &Ratio) -> i64 {
    assert!(r.is_positive(), "ceil_log2 requires a positive argument");
    // Estimate from bit lengths, then correct by exact comparison.
    let mut c = r.numer().bits() as i64 - r.denom().bits() as i64;
    while pow2(c) < *r {
        c += 1;
    }
    while c > i64::MIN && pow2(c - 1) >= *r {
        c -= 1;
    }
    c
}

/// Base-2 logarithm of a positive rational, as `f64`.
///
/// Works for arbitrarily large numerators/denominators by splitting off the
/// bit length before converting to float.
pub fn log2(r: &Ratio) -> f64 {
    assert!(r.is_positive(), "log2 requires a positive argument");
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

fn log2_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        x.to_f64().expect("small BigInt converts").log2()
    } else {
        let shift = bits - 52;
        let top: BigInt = x >> shift;
        top.to_f64().expect("shifted BigInt fits f64").log2() + shift as f64
    }
}

/// Parses a probability literal: a rational `a/b` or a decimal such as
/// `0.25`, `.5`, `1`. The conversion is exact in every case.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    let invalid = |msg: &str| Error::InvalidParameter(format!("{msg}: {s:?}"));
    if s.is_empty() {
        return Err(invalid("empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| invalid("invalid rational numerator"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| invalid("invalid rational denominator"))?;
        if d.is_zero() {
            return Err(invalid("zero denominator"));
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.contains('.') || frac_part.contains('-') {
            return Err(invalid("invalid decimal"));
        }
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        let whole: BigInt = int_part.parse().map_err(|_| invalid("invalid decimal"))?;
        if frac_part.is_empty() {
            return Ok(Ratio::from_integer(whole));
        }
        let frac: BigInt = frac_part.parse().map_err(|_| invalid("invalid decimal"))?;
        if frac.is_negative() {
            return Err(invalid("invalid decimal"));
        }
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let negative = s.trim_start().starts_with('-');
        let frac_ratio = Ratio::new(frac, scale);
        let whole_ratio = Ratio::from_integer(whole);
        return Ok(if negative {
            whole_ratio - frac_ratio
        } else {
            whole_ratio + frac_ratio
        });
    }
    let n: BigInt = s.parse().map_err(|_| invalid("invalid integer"))?;
    Ok(Ratio::from_integer(n))
}

/// Renders a rational in canonical lowest-terms form: `a` or `a/b`.
pub fn ratio_to_string(r: &Ratio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational equal to the given finite `f64` (every finite float is a
/// dyadic rational).
pub fn ratio_from_f64(x: f64) -> Ratio {
    Ratio::from_float(x).expect("finite f64 converts exactly")
}

/// Nearest-enough `f64` for reporting; safe for arbitrarily large
/// numerators/denominators (both are shifted into f64 range before
/// dividing). Exact whenever numerator and denominator fit 53 bits.
pub fn to_f64_lossy(r: &Ratio) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let numer = r.numer().magnitude();
    let denom = r.denom().magnitude();
    let shift_n = numer.bits().saturating_sub(53);
    let shift_d = denom.bits().saturating_sub(53);
    let n = (numer >> shift_n).to_f64().expect("shifted numerator fits");
    let d = (denom >> shift_d).to_f64().expect("shifted denominator fits");
    sign * (n / d) * (shift_n as f64 - shift_d as f64).exp2()
}
