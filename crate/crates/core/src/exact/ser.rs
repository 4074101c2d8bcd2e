//! Decimal-string serialization for big integers and rationals.

use serde::ser::SerializeSeq;
use serde::Serializer;

use super::{BigCount, Ratio};

pub fn count<S: Serializer>(v: &BigCount, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn counts<S: Serializer>(v: &[BigCount], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&c.to_string())?;
    }
    seq.end()
}

pub fn opt_counts<S: Serializer>(v: &Option<Vec<BigCount>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => counts(v, s),
        None => s.serialize_none(),
    }
}

pub fn opt_count<S: Serializer>(v: &Option<BigCount>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => count(v, s),
        None => s.serialize_none(),
    }
}

pub fn ratio<S: Serializer>(v: &Ratio, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn ratios<S: Serializer>(v: &[Ratio], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&r.to_string())?;
    }
    seq.end()
}
