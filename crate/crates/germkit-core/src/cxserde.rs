//! Serde helpers that encode `Complex64` as a `[re, im]` pair, which is the
//! on-disk convention for every document this crate reads or writes.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    (z.re, z.im).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let (re, im) = <(f64, f64)>::deserialize(d)?;
    Ok(Complex64::new(re, im))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, f64)> = v.iter().map(|z| (z.re, z.im)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<(f64, f64)>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect())
    }
}

/// `[re, im]` pair as a standalone JSON value.
pub fn to_json(z: Complex64) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}
