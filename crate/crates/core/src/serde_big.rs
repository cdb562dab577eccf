// Big integers go to JSON as decimal strings so no precision is lost.

use num_bigint::BigInt;
use serde::ser::SerializeSeq;
use serde::Serializer;

pub(crate) fn one<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub(crate) fn many<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}
