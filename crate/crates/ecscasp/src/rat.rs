//! Exact rational arithmetic used throughout the solver.
//!
//! All numeric values are `BigRational`s: numerator and denominator in
//! lowest terms with a positive denominator, so `4.5` and `9/2` are the
//! same value and no float ever enters a computation.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rat = num_rational::BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse a digit string, optionally with a fractional part, into an
/// exact rational (`"4.5"` becomes `9/2`).
pub fn rat_from_decimal(int_part: &str, frac_part: Option<&str>) -> Option<Rat> {
    let int: BigInt = int_part.parse().ok()?;
    let mut value = Rat::from_integer(int);
    if let Some(frac) = frac_part {
        if frac.is_empty() {
            return None;
        }
        let numer: BigInt = frac.parse().ok()?;
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        value += Rat::new(numer, denom);
    }
    Some(value)
}

/// Render a rational in the canonical `n` / `n/d` form.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering for display purposes only.  Terminating expansions
/// are printed exactly; non-terminating ones are truncated and marked
/// with a trailing ellipsis.
pub fn rat_to_decimal(r: &Rat, max_digits: usize) -> String {
    let mut out = String::new();
    if r.is_negative() {
        out.push('-');
    }
    let numer = r.numer().abs();
    let denom = r.denom().clone();
    let int = &numer / &denom;
    out.push_str(&int.to_string());
    let mut rem = &numer - &int * &denom;
    if rem.is_zero() {
        return out;
    }
    out.push('.');
    let ten = BigInt::from(10u32);
    for _ in 0..max_digits {
        rem *= &ten;
        let digit = &rem / &denom;
        out.push_str(&digit.to_string());
        rem -= digit * &denom;
        if rem.is_zero() {
            return out;
        }
    }
    out.push_str("...");
    out
}
