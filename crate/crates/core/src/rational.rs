//! Exact rationals and their text form.
//!
//! Every rational that crosses a file boundary is written as a string in lowest
//! terms: `"p/q"`, or just `"p"` when the denominator is one.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// The exact rational type used throughout the crate.
pub type Q = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as a rational (expected `p/q` or `p`)")]
pub struct ParseRationalError(pub String);

/// Shorthand constructor; reduces to lowest terms.
pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(numer, denom)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn parse_q(text: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: i64 = n.parse().map_err(|_| err())?;
    let d: i64 = d.parse().map_err(|_| err())?;
    if d == 0 {
        return Err(err());
    }
    Ok(Q::new(n, d))
}

pub fn fmt_q(value: &Q) -> String {
    value.to_string()
}

/// Fractional part in `[0, 1)`.
pub fn frac(value: &Q) -> Q {
    value - value.floor()
}

pub fn is_unit_interval(value: &Q) -> bool {
    !value.is_negative() && *value < Q::one()
}

pub fn sum<'a, I: IntoIterator<Item = &'a Q>>(values: I) -> Q {
    values.into_iter().fold(Q::zero(), |acc, v| acc + v)
}

/// Dot product of a rational functional with an integer vector.
pub fn pair(functional: &[Q], vector: &[i64]) -> Q {
    functional
        .iter()
        .zip(vector)
        .fold(Q::zero(), |acc, (f, &v)| acc + f * Q::from_integer(v))
}

/// `serde(with = ...)` adapter for a single rational.
pub mod serde_q {
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let text = String::deserialize(d)?;
        parse_q(&text).map_err(serde::de::Error::custom)
    }
}

/// `serde(with = ...)` adapter for a list of rationals.
pub mod serde_q_vec {
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[Q], s: S) -> Result<S::Ok, S::Error> {
        values.iter().map(fmt_q).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_q(t).map_err(serde::de::Error::custom))
            .collect()
    }
}
