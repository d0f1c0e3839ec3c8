//! Exact rational carrier and its string form.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Canonical machine-readable form: always `"p/q"`, also for integers.
pub fn to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator: {s:?}")));
    }
    Ok(Rational::new(num, den))
}

pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // Shift both sides down so the quotient survives the cast.
            let bits = r.numer().bits().max(r.denom().bits());
            let shift = bits.saturating_sub(1000);
            let a = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let b = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            a / b
        }
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a Rational>,
{
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// `r * scale` as an integer. Panics if the product is not integral.
pub fn scaled(r: &Rational, scale: &BigInt) -> BigInt {
    let v = r * Rational::from_integer(scale.clone());
    assert!(v.is_integer(), "scale {scale} does not clear {r}");
    v.to_integer()
}

pub fn to_biguint(v: &BigInt) -> BigUint {
    assert!(!v.is_negative());
    v.magnitude().clone()
}

pub fn sum<'a, I>(values: I) -> Rational
where
    I: IntoIterator<Item = &'a Rational>,
{
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integers_carry_unit_denominator() {
        assert_eq!(to_string(&int(6)), "6/1");
        assert_eq!(parse("6").unwrap(), int(6));
        assert_eq!(parse("-1/2").unwrap(), ratio(-1, 2));
        assert_eq!(parse("4/6").unwrap(), ratio(2, 3));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("0.5").is_err());
    }

    #[test]
    fn huge_values_convert_to_float() {
        let big = Rational::new(BigInt::from(3) << 2000u32, BigInt::from(2) << 2000u32);
        assert!((to_f64(&big) - 1.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn string_form_round_trips(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = ratio(p, q);
            prop_assert_eq!(parse(&to_string(&r)).unwrap(), r);
        }
    }
}
