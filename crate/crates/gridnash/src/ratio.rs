//! Exact rational helpers: decimal-string parsing/formatting and the rounding
//! primitives the discretization layer is built on.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::str::FromStr;

/// Parse an exact rational from a decimal string (`-3`, `0.1`, `2.5e-3`) or a
/// fraction string (`1/3`). Decimal strings map to exact powers of ten, so
/// `"0.1"` is one tenth, not the nearest binary float.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".to_string());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
        let d =
            BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e = i64::from_str(&s[pos + 1..]).map_err(|e| format!("bad exponent: {e}"))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("no digits in {s:?}"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(format!("invalid digits in {s:?}"));
    }
    let joined = format!("{int_part}{frac_part}");
    let mut numer = if joined.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(&joined).unwrap()
    };
    numer *= sign;
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let scale = ten.pow(shift.unsigned_abs() as u32);
    if shift >= 0 {
        Ok(BigRational::from_integer(numer * scale))
    } else {
        Ok(BigRational::new(numer, scale))
    }
}

/// Format a rational exactly: as a decimal string when the reduced
/// denominator is 10-smooth, otherwise as `num/den`. `parse_rational`
/// round-trips either form.
pub fn format_rational(r: &BigRational) -> String {
    let denom = r.denom();
    if denom.is_one() {
        return r.numer().to_string();
    }
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut rest = denom.clone();
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scale = BigInt::from(10u32).pow(places);
    let scaled = (r.numer() * &scale / denom).abs();
    let digits = format!("{:0>width$}", scaled.to_string(), width = places as usize + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places as usize);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Floor to an integer.
pub fn floor_int(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Ceiling to an integer.
pub fn ceil_int(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Round to the nearest integer with exact halves going to the larger value.
pub fn round_half_up(r: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2u32));
    (r + half).floor().to_integer()
}

/// Rational from an integer pair.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Rational from an integer.
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Lossy conversion for reporting and benchmarks only.
pub fn to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Scale down in tandem so huge numerators still convert.
    let mut n = num.clone();
    let mut d = den.clone();
    let limit = BigInt::from(1u64 << 52);
    while n.abs() > limit || d.abs() > limit {
        n >>= 8;
        d >>= 8;
        if d.is_zero() {
            return f64::INFINITY * if num.is_negative() { -1.0 } else { 1.0 };
        }
    }
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}
