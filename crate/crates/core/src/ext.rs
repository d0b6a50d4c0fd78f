//! Extended reals used for barrier levels and hitting functionals.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// A real number or one of the two infinities.
///
/// `NegInf` marks barrier regions where no investment is ever forced; it is
/// absorbing under [`Ext::max`] and never enters arithmetic. `PosInf` is the
/// value of a hitting functional whose denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ext {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Ext {
    pub fn is_finite(self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ext::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy view for output files.
    pub fn to_f64(self) -> f64 {
        match self {
            Ext::NegInf => f64::NEG_INFINITY,
            Ext::Finite(v) => v,
            Ext::PosInf => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Ext {
        if v == f64::NEG_INFINITY {
            Ext::NegInf
        } else if v == f64::INFINITY {
            Ext::PosInf
        } else {
            Ext::Finite(v)
        }
    }

    pub fn max(self, other: Ext) -> Ext {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Ext) -> Ext {
        if self.total_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Ext) -> Ordering {
        fn rank(e: &Ext) -> u8 {
            match e {
                Ext::NegInf => 0,
                Ext::Finite(_) => 1,
                Ext::PosInf => 2,
            }
        }
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => a.total_cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Ext) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::Finite(v) => write!(f, "{v}"),
            Ext::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ext::Finite(v) => s.serialize_f64(*v),
            Ext::NegInf => s.serialize_str("-inf"),
            Ext::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Ext, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ext::Finite(v)),
            Raw::Tag(t) if t == "-inf" => Ok(Ext::NegInf),
            Raw::Tag(t) if t == "inf" => Ok(Ext::PosInf),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unknown level {t:?}"))),
        }
    }
}

/// `#[serde(with = "crate::ext::unbounded")]` for plain floats that may be
/// infinite: stored as the same numbers or strings as [`Ext`].
pub mod unbounded {
    use super::Ext;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&Ext::from_f64(*v), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Ext::deserialize(d)?.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neg_inf_is_absorbing_under_max() {
        assert_eq!(Ext::NegInf.max(Ext::NegInf), Ext::NegInf);
        assert_eq!(Ext::NegInf.max(Ext::Finite(-1e300)), Ext::Finite(-1e300));
        assert_eq!(Ext::Finite(2.0).max(Ext::NegInf), Ext::Finite(2.0));
    }

    #[test]
    fn unbounded_floats_roundtrip() {
        #[derive(Serialize, Deserialize)]
        struct W(#[serde(with = "unbounded")] f64);
        for v in [f64::INFINITY, f64::NEG_INFINITY, -2.5] {
            let back: W = serde_json::from_str(&serde_json::to_string(&W(v)).unwrap()).unwrap();
            assert_eq!(back.0, v);
        }
    }

    #[test]
    fn ordering() {
        assert!(Ext::NegInf < Ext::Finite(f64::MIN));
        assert!(Ext::Finite(f64::MAX) < Ext::PosInf);
        assert_eq!(Ext::PosInf.min(Ext::Finite(3.0)), Ext::Finite(3.0));
    }
}
