//! JSON has no infinities; extended reals are written as `"inf"` / `"-inf"`.

use serde::Serializer;

pub fn extended<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        ser.serialize_f64(*x)
    } else if x.is_nan() {
        ser.serialize_str("nan")
    } else if *x > 0.0 {
        ser.serialize_str("inf")
    } else {
        ser.serialize_str("-inf")
    }
}

pub fn extended_opt<S: Serializer>(x: &Option<f64>, ser: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => extended(v, ser),
        None => ser.serialize_none(),
    }
}
