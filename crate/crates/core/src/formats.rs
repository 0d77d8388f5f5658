//! JSON file formats for signatures, splittings, representations, cocycles,
//! pairing reports and flow requests.
//!
//! Reals are written in the shortest decimal form that parses back to the same
//! `f64`, so a representation file round-trips bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cocycle::Cocycle;
use crate::linalg::Mat3;
use crate::orbifold::{CurveSpec, OrbifoldSignature};
use crate::rep::{GroupRep, RepError};
use crate::words::Generator;

/// Largest `|tr|` accepted for a cocycle value on load.
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Rep(#[from] RepError),
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| FormatError::Io { path: p.clone(), source: e })?;
    serde_json::from_str(&text).map_err(|e| FormatError::Json { path: p, source: e })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), FormatError> {
    let p = path.display().to_string();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| FormatError::Json { path: p.clone(), source: e })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| FormatError::Io { path: p, source: e })
}

fn to_row_major(m: &Mat3) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
    out
}

fn from_row_major(v: &[f64; 9]) -> Mat3 {
    Mat3::from_row_slice(v)
}

fn parse_gen(name: &str) -> Result<Generator, FormatError> {
    name.parse().map_err(|_| FormatError::Invalid(format!("bad generator name {name:?}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingFile {
    pub curves: Vec<CurveSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepFile {
    pub signature: OrbifoldSignature,
    pub generators: BTreeMap<String, [f64; 9]>,
    pub residual: f64,
}

impl RepFile {
    pub fn from_rep(rep: &GroupRep) -> Self {
        RepFile {
            signature: rep.signature().clone(),
            generators: rep.matrices().iter().map(|(g, m)| (g.name(), to_row_major(m))).collect(),
            residual: rep.relation_residual(),
        }
    }

    /// Rebuilds the representation; the stored residual is informational and
    /// is recomputed rather than trusted.
    pub fn to_rep(&self) -> Result<GroupRep, FormatError> {
        self.signature.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        let mut m = BTreeMap::new();
        for (name, v) in &self.generators {
            let g = parse_gen(name)?;
            if !self.signature.contains(g) {
                return Err(FormatError::Invalid(format!("generator {name} is not in the signature")));
            }
            m.insert(g, from_row_major(v));
        }
        Ok(GroupRep::from_signature(&self.signature, m)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CocycleFile(pub BTreeMap<String, [f64; 9]>);

impl CocycleFile {
    pub fn from_cocycle(u: &Cocycle) -> Self {
        CocycleFile(u.values().iter().map(|(g, m)| (g.name(), to_row_major(m))).collect())
    }

    pub fn to_cocycle(&self) -> Result<Cocycle, FormatError> {
        let mut out = BTreeMap::new();
        for (name, v) in &self.0 {
            let m = from_row_major(v);
            if m.trace().abs() > TRACE_TOL {
                return Err(FormatError::Invalid(format!("value at {name} has trace {:e}", m.trace())));
            }
            out.insert(parse_gen(name)?, m);
        }
        Ok(Cocycle::from_map(out))
    }
}

pub fn read_signature(path: &Path) -> Result<OrbifoldSignature, FormatError> {
    let sig: OrbifoldSignature = read_json(path)?;
    sig.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(sig)
}

pub fn read_splitting(path: &Path) -> Result<Vec<CurveSpec>, FormatError> {
    Ok(read_json::<SplittingFile>(path)?.curves)
}

pub fn read_rep(path: &Path) -> Result<GroupRep, FormatError> {
    read_json::<RepFile>(path)?.to_rep()
}

pub fn write_rep(path: &Path, rep: &GroupRep) -> Result<(), FormatError> {
    write_json(path, &RepFile::from_rep(rep))
}

pub fn read_cocycle(path: &Path) -> Result<Cocycle, FormatError> {
    read_json::<CocycleFile>(path)?.to_cocycle()
}

pub fn write_cocycle(path: &Path, u: &Cocycle) -> Result<(), FormatError> {
    write_json(path, &CocycleFile::from_cocycle(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn representation_round_trip_is_exact() {
        let rep = corpus::genus2_fuchsian();
        let text = serde_json::to_string(&RepFile::from_rep(&rep)).unwrap();
        let back: RepFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_rep().unwrap().matrices(), rep.matrices());
    }

    #[test]
    fn cocycle_trace_is_checked() {
        let mut f = CocycleFile(BTreeMap::new());
        f.0.insert("x1".into(), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(f.to_cocycle(), Err(FormatError::Invalid(_))));
        f.0.insert("x1".into(), [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(f.to_cocycle().is_ok());
    }

    #[test]
    fn splitting_records() {
        let text = r#"{"curves": [{"type": "scc-separating", "first": 1, "last": 1},
            {"type": "scc-nonseparating", "handle": 2}, {"type": "full-suborbifold", "i": 1, "j": 2}]}"#;
        let f: SplittingFile = serde_json::from_str(text).unwrap();
        assert_eq!(f.curves[1], CurveSpec::SccNonSeparating { handle: 2 });
    }
}
