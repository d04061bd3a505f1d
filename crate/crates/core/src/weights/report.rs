use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::grid::Cube;

/// A condition constant; `+inf` serializes as the string `"+inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Constant(pub f64);

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("+inf")
        }
    }
}

impl<'de> Deserialize<'de> for Constant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Constant(x)),
            Raw::Text(t) if t == "+inf" => Ok(Constant(f64::INFINITY)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad constant {t:?}"))),
        }
    }
}

/// A supremum over a cube family with the cube (or product of cubes) attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub constant: Constant,
    pub argmax: Vec<Cube>,
    pub family: String,
    pub exponents: serde_json::Value,
}

impl ConditionReport {
    pub fn value(&self) -> f64 {
        self.constant.0
    }

    pub fn is_finite(&self) -> bool {
        self.constant.0.is_finite()
    }
}
