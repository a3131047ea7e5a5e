//! Exact decimal rendering and parsing.
//!
//! Table reproduction compares displayed digits, so rounding must be done
//! in exact integer arithmetic: a rational is scaled by a power of ten and
//! rounded half away from zero, never passed through binary floating point.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, Zero};

use crate::bigfloat::BigReal;
use crate::error::{Error, Result};

fn pow10(e: u32) -> BigInt {
    BigInt::from(10u32).pow(e)
}

/// Round p/q (q > 0) to the nearest integer, halves away from zero.
fn round_div(p: &BigInt, q: &BigInt) -> BigInt {
    let a = p.abs();
    let base = &a / q;
    let rem = a - &base * q;
    let rounded = if rem * 2 >= *q { base + 1 } else { base };
    if p.is_negative() {
        -rounded
    } else {
        rounded
    }
}

fn digits_len(n: &BigInt) -> usize {
    n.abs().to_string().len()
}

/// Scientific notation with the given number of significant digits,
/// e.g. 270648 at 5 digits renders as "2.7065e5".
pub fn rational_to_sci(r: &BigRational, sig_digits: u32) -> String {
    assert!(sig_digits >= 1);
    if r.is_zero() {
        return format!("{}e0", zero_mantissa(sig_digits));
    }
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    // decimal exponent estimate from digit counts, then corrected below
    let mut e10 = digits_len(&num) as i64 - digits_len(&den) as i64;
    // ensure 10^e10 <= value < 10^(e10+1)
    loop {
        let ok_low = if e10 >= 0 {
            num.clone() * pow10(0) >= &den * pow10(e10 as u32)
        } else {
            num.clone() * pow10((-e10) as u32) >= den
        };
        if !ok_low {
            e10 -= 1;
            continue;
        }
        let ok_high = if e10 + 1 >= 0 {
            num.clone() < &den * pow10((e10 + 1) as u32)
        } else {
            num.clone() * pow10((-(e10 + 1)) as u32) < den
        };
        if !ok_high {
            e10 += 1;
            continue;
        }
        break;
    }
    // mantissa digits: round(value * 10^(sig-1-e10))
    let t = sig_digits as i64 - 1 - e10;
    let (p, q) = if t >= 0 {
        (num * pow10(t as u32), den)
    } else {
        (num, den * pow10((-t) as u32))
    };
    let mut digits = round_div(&p, &q);
    if digits_len(&digits) > sig_digits as usize {
        // carry like 99995 -> 10000: drop one digit
        digits = &digits / 10;
        e10 += 1;
    }
    let s = digits.to_string();
    let mantissa = if sig_digits == 1 {
        s
    } else {
        format!("{}.{}", &s[..1], &s[1..])
    };
    format!("{}{}e{}", if neg { "-" } else { "" }, mantissa, e10)
}

fn zero_mantissa(sig_digits: u32) -> String {
    if sig_digits == 1 {
        "0".to_string()
    } else {
        format!("0.{}", "0".repeat(sig_digits as usize - 1))
    }
}

/// Fixed-point notation with the given number of decimal places,
/// e.g. 21/11 at 30 places renders as "1.909090909090909090909090909091".
pub fn rational_to_fixed(r: &BigRational, decimals: u32) -> String {
    let scaled = round_div(&(r.numer() * pow10(decimals)), r.denom());
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let (int_part, frac_part) = if s.len() > decimals as usize {
        let split = s.len() - decimals as usize;
        (s[..split].to_string(), s[split..].to_string())
    } else {
        ("0".to_string(), format!("{:0>width$}", s, width = decimals as usize))
    };
    let sign = if neg { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Parse a plain decimal literal like "-3.625e-2" into a BigReal at the
/// given precision (one final rounding, error bound included).
pub fn parse_decimal(s: &str, prec: u32) -> Result<BigReal> {
    let s = s.trim();
    let bad = || Error::Config(format!("invalid decimal literal: {s:?}"));
    let (mant_str, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (sign, body) = match mant_str.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mant_str.strip_prefix('+').unwrap_or(mant_str)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits: String = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let value: BigInt = digits.parse().map_err(|_| bad())?;
    let value = value * BigInt::from(sign);
    let scale = exp10 - frac_part.len() as i64;
    let rational = if scale >= 0 {
        BigRational::from(value * pow10(scale as u32))
    } else {
        BigRational::new(value, pow10((-scale) as u32))
    };
    Ok(BigReal::from_rational(&rational, prec))
}

/// Decimal rendering of a BigReal at `sig_digits` significant digits in
/// plain (non-scientific) form when the magnitude is moderate, otherwise
/// scientific. Used for report output; exactness claims always go through
/// the rational formatters above.
pub fn bigreal_to_decimal(x: &BigReal, sig_digits: u32) -> String {
    if x.mant().is_zero() {
        return "0".to_string();
    }
    // convert the exact dyadic mantissa*2^exp to a rational and reuse
    let r = dyadic_to_rational(x);
    let sci = rational_to_sci(&r, sig_digits);
    // keep plain form for mid-range magnitudes
    let e10 = sci_exponent(&sci);
    if (-6..=10).contains(&e10) {
        let decimals = (sig_digits as i64 - 1 - e10).max(0) as u32;
        rational_to_fixed(&r, decimals)
    } else {
        sci
    }
}

fn sci_exponent(s: &str) -> i64 {
    s.rsplit_once('e').map(|(_, e)| e.parse().unwrap_or(0)).unwrap_or(0)
}

/// The exact rational equal to the stored dyadic value of x.
pub fn dyadic_to_rational(x: &BigReal) -> BigRational {
    let exp = x.exp();
    if exp >= 0 {
        BigRational::from(x.mant() << exp as u64)
    } else {
        BigRational::new(x.mant().clone(), BigInt::from(1) << (-exp) as u64)
    }
}

/// Error bound as a short human-readable magnitude like "2^-190".
pub fn errmag_to_string(e: crate::bigfloat::ErrMag) -> String {
    if e.is_zero() {
        "0".to_string()
    } else {
        format!("2^{}", e.log2_approx().ceil() as i64)
    }
}

/// Decimal digits of agreement between two values given their gap bound:
/// largest d with |a - b| + err <= 10^-d.
pub fn agreement_digits(gap_with_err: f64) -> i64 {
    if gap_with_err <= 0.0 {
        return i64::MAX;
    }
    (-gap_with_err.log10()).floor() as i64
}
