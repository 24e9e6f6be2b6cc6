//! Coefficient arithmetic. Every algebra, matrix and probability in this
//! crate is generic over a [`Scalar`]: either exact rationals ([`Rat`]) or
//! `f64`. The mode is chosen once (one type parameter) so exact and floating
//! coefficients can never mix inside a single element.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficients.
pub type Rat = BigRational;

/// Relative tolerance used for float-mode element equality.
pub const FLOAT_EQ_TOL: f64 = 1e-12;

/// Relative tolerance used when comparing independent float-mode routes.
pub const FLOAT_ROUTE_TOL: f64 = 1e-9;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + Zero + One + 'static
{
    /// True for coefficient modes that admit no rounding.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossless only in float mode; exact mode callers must not rely on it.
    fn from_f64(v: f64) -> Self;

    /// Parses an integer, a `p/q` fraction or a finite decimal.
    fn parse(text: &str) -> Result<Self>;

    /// Coefficient equality: exact in rational mode, relative tolerance
    /// [`FLOAT_EQ_TOL`] in float mode.
    fn approx_eq(&self, other: &Self) -> bool;

    fn to_f64(&self) -> f64;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        Rat::from_float(v).expect("non-finite float")
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn parse(text: &str) -> Result<Self> {
        if let Some((num, den)) = text.split_once('/') {
            let n: f64 = num
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("bad number `{text}`")))?;
            let d: f64 = den
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("bad number `{text}`")))?;
            if d == 0.0 {
                return Err(Error::Argument(format!("zero denominator in `{text}`")));
            }
            return Ok(n / d);
        }
        text.trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad number `{text}`")))
    }

    fn approx_eq(&self, other: &Self) -> bool {
        float_close(*self, *other, FLOAT_EQ_TOL)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Relative closeness with an absolute floor of one.
pub fn float_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn parse_rational(text: &str) -> Result<Rat> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Argument("empty number".into()));
    }
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad numerator in `{text}`")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("bad denominator in `{text}`")))?;
        if d.is_zero() {
            return Err(Error::Argument(format!("zero denominator in `{text}`")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        // Finite decimals are exact rationals: 1.25 = 125/100.
        let digits: String = format!("{int_part}{frac_part}");
        let n: BigInt = digits
            .parse()
            .map_err(|_| Error::Argument(format!("bad decimal `{text}`")))?;
        let mut d = BigInt::one();
        for _ in 0..frac_part.len() {
            d *= 10;
        }
        return Ok(Rat::new(n, d));
    }
    let n: BigInt = text
        .parse()
        .map_err(|_| Error::Argument(format!("bad integer `{text}`")))?;
    Ok(Rat::from_integer(n))
}

/// Factorial as a scalar; used by truncated power series.
pub fn factorial<S: Scalar>(k: usize) -> S {
    let mut out = S::one();
    for j in 2..=k {
        out = out * S::from_i64(j as i64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(Rat::parse("2/3").unwrap(), Rat::from_ratio(2, 3));
        assert_eq!(Rat::parse("-7").unwrap(), Rat::from_i64(-7));
        assert_eq!(Rat::parse("1.25").unwrap(), Rat::from_ratio(5, 4));
        assert_eq!(Rat::parse("-0.5").unwrap(), Rat::from_ratio(-1, 2));
        assert!(Rat::parse("1/0").is_err());
        assert!(Rat::parse("abc").is_err());
        assert_eq!(f64::parse("2/4").unwrap(), 0.5);
    }

    #[test]
    fn float_equality_is_relative() {
        assert!(1.0f64.approx_eq(&(1.0 + 1e-14)));
        assert!(!1.0f64.approx_eq(&1.001));
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial::<Rat>(0), Rat::one());
        assert_eq!(factorial::<Rat>(5), Rat::from_i64(120));
    }
}
