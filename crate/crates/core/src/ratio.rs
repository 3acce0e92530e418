//! Exact rationals as `"num/den"` strings, the wire form used by every
//! JSON interface in this crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Format a rational as `num/den`, always reduced, denominator positive.
pub fn format(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `"num/den"` or a bare integer `"num"`.
pub fn parse(s: &str) -> Result<BigRational> {
    let err = || Error::RationalParse(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(num, den))
}

/// Parse a probability weight: a rational in [0, 1].
pub fn parse_unit_interval(s: &str) -> Result<BigRational> {
    let r = parse(s)?;
    if r.is_negative() || r > BigRational::one() {
        return Err(Error::InvalidParameter(format!("{s} is not in [0, 1]")));
    }
    Ok(r)
}

/// Serde adapter for `Vec<BigRational>` fields.
pub mod serde_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(v.iter().map(format))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let strings = Vec::<String>::deserialize(de)?;
        strings
            .iter()
            .map(|s| parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for a single `BigRational` field.
pub mod serde_one {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(de)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Lossy conversion for float-side consumers (char tables, Monte Carlo).
pub fn to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Exact for the small numbers this crate produces; falls back to a
    // string round-trip for anything that overflows i64.
    match (i64::try_from(num), i64::try_from(den)) {
        (Ok(n), Ok(d)) => n as f64 / d as f64,
        _ => {
            let n: f64 = num.to_string().parse().unwrap_or(f64::NAN);
            let d: f64 = den.to_string().parse().unwrap_or(f64::NAN);
            n / d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["1/2", "0/1", "7/9", "3/4"] {
            assert_eq!(format(&parse(s).unwrap()), s);
        }
    }

    #[test]
    fn parse_bare_integer() {
        assert_eq!(format(&parse("2").unwrap()), "2/1");
    }

    #[test]
    fn parse_reduces() {
        assert_eq!(format(&parse("2/4").unwrap()), "1/2");
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(parse("1/0").is_err());
        assert!(parse("x/2").is_err());
    }

    #[test]
    fn unit_interval_bounds() {
        assert!(parse_unit_interval("1/2").is_ok());
        assert!(parse_unit_interval("0").is_ok());
        assert!(parse_unit_interval("1").is_ok());
        assert!(parse_unit_interval("3/2").is_err());
        assert!(parse_unit_interval("-1/2").is_err());
    }
}
