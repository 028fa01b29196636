//! Exact rational arithmetic helpers and the binomial moment identities.
//!
//! Rationals are `num_rational::BigRational`, which is always kept in
//! lowest terms with a positive denominator, so structural equality is
//! value equality.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{FdError, Result};
use crate::Rational;

/// Shorthand constructor for small rationals. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn binom(n: u32, j: u32) -> Result<BigInt> {
    if j > n {
        return Err(FdError::Domain(format!("binomial C({n}, {j}) with j > n")));
    }
    let j = j.min(n - j);
    let mut acc = BigInt::one();
    for i in 0..j {
        // acc = C(n, i+1) after this step; the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    Ok(acc)
}

/// Integer power of a rational. Negative exponents need a nonzero base.
pub fn pow(base: &Rational, exp: i32) -> Result<Rational> {
    if exp < 0 && base.is_zero() {
        return Err(FdError::Domain(format!("0 raised to negative power {exp}")));
    }
    Ok(num_traits::Pow::pow(base, exp))
}

/// `Σ_{j=0}^{m} (-1)^j C(m, j) (m + r - j)^p`.
///
/// Vanishes for `1 <= p < m` and equals `m!` for `p = m`, for every `r`.
pub fn moment_sum(m: u32, r: &Rational, p: u32) -> Rational {
    let shift = r + Rational::from_integer(BigInt::from(m));
    let mut total = Rational::zero();
    for j in 0..=m {
        let node = &shift - Rational::from_integer(BigInt::from(j));
        let term = Rational::from_integer(binom(m, j).expect("j <= m")) * num_traits::Pow::pow(&node, p);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Formats as `num/den`, dropping the denominator when it is 1.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || FdError::ParseRational(text.to_string());
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = denom.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(value: &Rational) -> i32 {
    if value.is_positive() {
        1
    } else if value.is_negative() {
        -1
    } else {
        0
    }
}

/// Serde adapter storing a rational as its `num/den` string.
pub mod serde_rational {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&super::format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        super::parse_rational(&text).map_err(D::Error::custom)
    }
}
