//! Exact rational scalars: parsing, formatting and serde adapters.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serializer;

use crate::error::{Error, Result};

/// The scalar type used throughout the crate.
pub type Q = BigRational;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"3"`, `"-1/4"`, `"0.125"`, `"1e-3"` or `"2.5E2"` exactly.
pub fn parse(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::schema("number", format!("cannot parse `{s}` as a rational"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::schema("number", format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{whole}{frac}");
    let numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|_| bad())?
    };
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Q::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Canonical text form: `"n"` for integers, `"n/d"` otherwise.
pub fn format(q: &Q) -> String {
    q.to_string()
}

pub fn sum<'a>(it: impl IntoIterator<Item = &'a Q>) -> Q {
    it.into_iter().fold(Q::zero(), |acc, x| acc + x)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn max<'a>(it: impl IntoIterator<Item = &'a Q>) -> Option<Q> {
    it.into_iter().max().cloned()
}

pub fn min<'a>(it: impl IntoIterator<Item = &'a Q>) -> Option<Q> {
    it.into_iter().min().cloned()
}

pub fn is_probability(q: &Q) -> bool {
    !q.is_negative() && q <= &Q::one()
}

/// Lossy conversion for display only.
pub fn to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// `serialize_with` adapters rendering rationals as exact strings.
pub mod ser {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn rat<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(q))
    }

    pub fn opt_rat<S: Serializer>(q: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_str(&format(q)),
            None => s.serialize_none(),
        }
    }

    pub fn vec<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format(q))?;
        }
        seq.end()
    }

    pub fn opt_vec<S: Serializer>(v: &Option<Vec<Q>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => vec(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn mat<S: Serializer>(m: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(format).collect()).collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn opt_mat<S: Serializer>(m: &Option<Vec<Vec<Q>>>, s: S) -> Result<S::Ok, S::Error> {
        match m {
            Some(m) => mat(m, s),
            None => s.serialize_none(),
        }
    }

    pub fn cube<S: Serializer>(m: &[Vec<Vec<Q>>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Vec<String>>> = m
            .iter()
            .map(|r| r.iter().map(|c| c.iter().map(format).collect()).collect())
            .collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn opt_cube<S: Serializer>(m: &Option<Vec<Vec<Vec<Q>>>>, s: S) -> Result<S::Ok, S::Error> {
        match m {
            Some(m) => cube(m, s),
            None => s.serialize_none(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse("1/4").unwrap(), ratio(1, 4));
        assert_eq!(parse("-2/8").unwrap(), ratio(-1, 4));
        assert_eq!(parse("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse("-.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse("2.5E2").unwrap(), int(250));
        assert_eq!(parse(" 7 ").unwrap(), int(7));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1/0", "1..2", "--1", "1/", "."] {
            assert!(parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format(&ratio(2, 4)), "1/2");
        assert_eq!(format(&int(-3)), "-3");
        assert_eq!(format(&Q::zero()), "0");
    }
}
