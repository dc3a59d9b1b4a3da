//! Serde helper for float vectors that may hold NaN or infinities, which
//! plain JSON numbers cannot carry. Non-finite values travel as strings.

use alloc::vec::Vec;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};

pub fn serialize<S: Serializer>(values: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(values.len()))?;
    for &v in values {
        if v.is_nan() {
            seq.serialize_element("NaN")?;
        } else if v == f64::INFINITY {
            seq.serialize_element("inf")?;
        } else if v == f64::NEG_INFINITY {
            seq.serialize_element("-inf")?;
        } else {
            seq.serialize_element(&v)?;
        }
    }
    seq.end()
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<f64>, D::Error> {
    deserializer.deserialize_seq(FloatsVisitor)
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum Float<'a> {
    Num(f64),
    #[serde(borrow)]
    Text(&'a str),
}

struct FloatsVisitor;

impl<'de> Visitor<'de> for FloatsVisitor {
    type Value = Vec<f64>;

    fn expecting(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("a list of numbers or \"NaN\"/\"inf\"/\"-inf\"")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
        let mut out = Vec::new();
        while let Some(item) = seq.next_element::<Float<'de>>()? {
            out.push(match item {
                Float::Num(v) => v,
                Float::Text("NaN") => f64::NAN,
                Float::Text("inf") => f64::INFINITY,
                Float::Text("-inf") => f64::NEG_INFINITY,
                Float::Text(other) => return Err(de::Error::custom(alloc::format!("bad float {other:?}"))),
            });
        }
        Ok(out)
    }
}

/// The same encoding for a single value.
pub mod scalar {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        match *v {
            v if v.is_nan() => serializer.serialize_str("NaN"),
            f64::INFINITY => serializer.serialize_str("inf"),
            f64::NEG_INFINITY => serializer.serialize_str("-inf"),
            v => serializer.serialize_f64(v),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        match super::Float::deserialize(deserializer)? {
            super::Float::Num(v) => Ok(v),
            super::Float::Text("NaN") => Ok(f64::NAN),
            super::Float::Text("inf") => Ok(f64::INFINITY),
            super::Float::Text("-inf") => Ok(f64::NEG_INFINITY),
            super::Float::Text(other) => Err(serde::de::Error::custom(alloc::format!("bad float {other:?}"))),
        }
    }
}
