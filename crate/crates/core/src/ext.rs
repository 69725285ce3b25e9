//! Extended reals: finite doubles plus the two infinities.
//!
//! Reach times are `+∞` when a direction cannot be guaranteed, and `λ±`
//! optima are `−∞` when their feasible set is empty (sup of the empty set).
//! Machine output writes the infinities as the strings `"inf"` / `"-inf"`;
//! human output uses `∞`.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);
    pub const ONE: ExtReal = ExtReal::Finite(1.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion to `f64` (`±∞` map to the IEEE infinities).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }

    /// Reciprocal of a nonnegative quantity: `1/0 = +∞`, `1/+∞ = 0`.
    pub fn recip_nonneg(self) -> ExtReal {
        match self {
            ExtReal::Finite(0.0) => ExtReal::PosInf,
            ExtReal::Finite(v) => ExtReal::Finite(1.0 / v),
            ExtReal::PosInf => ExtReal::ZERO,
            ExtReal::NegInf => ExtReal::NegInf,
        }
    }

    /// Maps a nonnegative order-1 reach time to its order-`k` value `(k!·T)^(1/k)`.
    pub fn kth_order_time(self, k: u32) -> ExtReal {
        match self {
            ExtReal::Finite(t) => ExtReal::Finite(order_k_time(t, k)),
            other => other,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &ExtReal) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64())
    }

    /// Human-readable rendering with `∞`.
    pub fn human(self, precision: usize) -> String {
        match self {
            ExtReal::Finite(v) => format!("{v:.precision$}"),
            ExtReal::PosInf => "∞".to_string(),
            ExtReal::NegInf => "-∞".to_string(),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::NegInf => f.write_str("-inf"),
        }
    }
}

/// `k!` as a double.
pub fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * f64::from(i))
}

/// `(k!·t)^(1/k)`: the order-`k` reach time given the order-1 time `t`.
pub fn order_k_time(t: f64, k: u32) -> f64 {
    match k {
        1 => t,
        2 => (2.0 * t).sqrt(),
        _ => (factorial(k) * t).powf(1.0 / f64::from(k)),
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::PosInf => serializer.serialize_str("inf"),
            ExtReal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal::PosInf),
                    "-inf" => Ok(ExtReal::NegInf),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(ExtVisitor)
    }
}
