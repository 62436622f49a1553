//! Serde helpers for floats that may be infinite.
//!
//! JSON has no infinity literal; `+inf`/`-inf`/NaN are written as the strings
//! `"inf"`, `"-inf"` and `"nan"` and read back from the same spellings.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

fn to_repr(v: f64) -> Repr {
    if v.is_finite() {
        Repr::Num(v)
    } else if v.is_nan() {
        Repr::Text("nan".into())
    } else if v > 0.0 {
        Repr::Text("inf".into())
    } else {
        Repr::Text("-inf".into())
    }
}

fn from_repr<E: de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(v) => Ok(v),
        Repr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("expected a number, got `{other}`"))),
        },
    }
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    to_repr(*v).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    from_repr(Repr::deserialize(d)?)
}

/// Same encoding for a map of named series.
pub mod series {
    use std::collections::BTreeMap;

    use super::*;

    pub fn serialize<S: Serializer>(
        v: &BTreeMap<String, Vec<f64>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<&str, Vec<Repr>> = v
            .iter()
            .map(|(k, vals)| (k.as_str(), vals.iter().map(|&x| to_repr(x)).collect()))
            .collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, Vec<f64>>, D::Error> {
        let m = BTreeMap::<String, Vec<Repr>>::deserialize(d)?;
        m.into_iter()
            .map(|(k, vals)| {
                let vals = vals
                    .into_iter()
                    .map(from_repr)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((k, vals))
            })
            .collect()
    }
}
