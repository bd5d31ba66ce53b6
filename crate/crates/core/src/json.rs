//! JSON encodings shared by the CLI, the fixture file and the bindings.
//!
//! Rationals are written as integers when integral and as `"p/q"` strings
//! otherwise; both spellings are accepted on input.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LatticeError, Result};
use crate::lattice::Lattice;
use crate::linalg::{Rational, RationalMatrix};

/// A rational number with the integer-or-`"p/q"` JSON encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonRational(pub Rational);

impl FromStr for JsonRational {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            BigInt::from_str(t.trim()).map_err(|e| LatticeError::Parse(format!("{t:?}: {e}")))
        };
        match s.split_once('/') {
            Some((p, q)) => {
                let q = parse(q)?;
                if q == BigInt::from(0) {
                    return Err(LatticeError::Parse(format!("zero denominator in {s:?}")));
                }
                Ok(Self(Rational::new(parse(p)?, q)))
            }
            None => Ok(Self(Rational::from_integer(parse(s)?))),
        }
    }
}

impl fmt::Display for JsonRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for JsonRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Ok(v) = i64::try_from(self.0.to_integer()) {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for JsonRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Self(Rational::from_integer(BigInt::from(v)))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

pub fn matrix_to_json(m: &RationalMatrix) -> Vec<Vec<JsonRational>> {
    m.row_vecs()
        .into_iter()
        .map(|r| r.into_iter().map(JsonRational).collect())
        .collect()
}

pub fn matrix_from_json(rows: &[Vec<JsonRational>]) -> Result<RationalMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    let rows = rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect();
    RationalMatrix::from_rows(rows, cols)
}

/// Lattice as `{"name", "gram", "basis"}`. The basis is only meaningful
/// under the standard inner product, so it is emitted only in that case.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub gram: Vec<Vec<JsonRational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<JsonRational>>>,
}

impl LatticeJson {
    pub fn from_lattice(l: &Lattice) -> Self {
        Self {
            name: l.name().map(str::to_owned),
            gram: matrix_to_json(l.gram()),
            basis: l.has_standard_form().then(|| matrix_to_json(l.basis())),
        }
    }

    /// Builds the lattice from its basis when present, else from its Gram.
    /// A basis that disagrees with the Gram is rejected.
    pub fn to_lattice(&self) -> Result<Lattice> {
        let gram = matrix_from_json(&self.gram)?;
        let lattice = match &self.basis {
            Some(b) => {
                let l = Lattice::new(matrix_from_json(b)?)?;
                if self.gram.is_empty() || *l.gram() == gram {
                    l
                } else {
                    return Err(LatticeError::Parse("basis and gram disagree".into()));
                }
            }
            None => Lattice::from_gram(&gram)?,
        };
        Ok(match &self.name {
            Some(n) => lattice.named(n.clone()),
            None => lattice,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratio};

    #[test]
    fn rational_spellings() {
        let v: Vec<JsonRational> = serde_json::from_str(r#"[3, "-1/2", "4/2", " 7 "]"#).unwrap();
        assert_eq!(v[0].0, rat(3));
        assert_eq!(v[1].0, ratio(-1, 2));
        assert_eq!(v[2].0, rat(2));
        assert_eq!(v[3].0, rat(7));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[3,"-1/2",2,7]"#);
        assert!("1/0".parse::<JsonRational>().is_err());
    }

    #[test]
    fn lattice_round_trip() {
        let text = r#"{"name":"A2","gram":[[2,-1],[-1,2]]}"#;
        let j: LatticeJson = serde_json::from_str(text).unwrap();
        let l = j.to_lattice().unwrap();
        assert_eq!(l.determinant(), rat(3));
        assert_eq!(l.name(), Some("A2"));
        let back = LatticeJson::from_lattice(&l);
        assert!(back.basis.is_none());
        let z = Lattice::new(RationalMatrix::identity(2)).unwrap();
        let zj = LatticeJson::from_lattice(&z);
        assert_eq!(zj.to_lattice().unwrap(), z);
    }
}
