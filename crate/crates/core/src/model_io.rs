//! JSON model files.
//!
//! ```json
//! { "dim": 3, "h": [], "k": [0, 1, 2],
//!   "brackets": [[0, 1, 2, "1"]],
//!   "inner": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
//!   "v": [0, 0, "1/2"],
//!   "phi": { "family": "square" } }
//! ```
//!
//! Indices are 0-based. Only `i < j` bracket entries need to be listed; the
//! antisymmetric partner is implied. Scalars may be JSON numbers or strings
//! holding an integer, a fraction `p/q` or a decimal.

use std::path::Path;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{BracketEntry, LieModel};
use crate::metric::PhiSpec;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Scalar::Int(i) => Ok(BigRational::from_integer((*i).into())),
            Scalar::Float(x) => BigRational::from_float(*x)
                .ok_or_else(|| Error::Parse(format!("non-finite number {x}"))),
            Scalar::Text(t) => parse_rational(t),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Scalar::Int(i) => Ok(*i as f64),
            Scalar::Float(x) => Ok(*x),
            Scalar::Text(t) => {
                let r = parse_rational(t)?;
                r.to_f64().ok_or_else(|| Error::Parse(format!("cannot represent {t} as f64")))
            }
        }
    }
}

/// Parses `"3"`, `"-2/5"` or `"0.125"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            s => s.parse().map_err(|_| bad())?,
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = BigRational::new(int_part * &scale + frac_part, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct PhiFile {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Scalar>>,
}

impl PhiFile {
    pub fn to_spec(&self) -> Result<PhiSpec> {
        match &self.coeffs {
            Some(c) if self.family == "custom" => {
                let coeffs = c.iter().map(Scalar::to_rational).collect::<Result<Vec<_>>>()?;
                PhiSpec::custom(coeffs)
            }
            None if self.family == "custom" => {
                Err(Error::InvalidPhi("custom family needs \"coeffs\"".into()))
            }
            _ => PhiSpec::named(&self.family),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(default)]
    pub h: Vec<usize>,
    pub k: Vec<usize>,
    #[serde(default)]
    pub brackets: Vec<(usize, usize, usize, Scalar)>,
    pub inner: Vec<Vec<Scalar>>,
    pub v: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiFile>,
}

impl ModelFile {
    pub fn to_model(&self) -> Result<LieModel> {
        let entries = self
            .brackets
            .iter()
            .map(|(i, j, l, c)| Ok(BracketEntry::new(*i, *j, *l, c.to_rational()?)))
            .collect::<Result<Vec<_>>>()?;
        let nk = self.inner.len();
        let mut inner = DMatrix::zeros(nk, nk);
        for (a, row) in self.inner.iter().enumerate() {
            if row.len() != nk {
                return Err(Error::Parse(format!("inner row {a} has {} entries, expected {nk}", row.len())));
            }
            for (b, x) in row.iter().enumerate() {
                inner[(a, b)] = x.to_f64()?;
            }
        }
        let v = self.v.iter().map(Scalar::to_f64).collect::<Result<Vec<_>>>()?;
        LieModel::new(self.dim, self.h.clone(), self.k.clone(), &entries, inner, v)
    }

    pub fn phi_spec(&self) -> Result<Option<PhiSpec>> {
        self.phi.as_ref().map(PhiFile::to_spec).transpose()
    }
}

/// A loaded model plus the φ it names, if any.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub name: Option<String>,
    pub model: LieModel,
    pub phi: Option<PhiSpec>,
}

pub fn parse_model(json: &str) -> Result<LoadedModel> {
    let file: ModelFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(LoadedModel { name: file.name.clone(), model: file.to_model()?, phi: file.phi_spec()? })
}

pub fn load_model(path: impl AsRef<Path>) -> std::io::Result<Result<LoadedModel>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_model(&text))
}

pub fn parse_phi(json: &str) -> Result<PhiSpec> {
    let file: PhiFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_spec()
}
