//! JSON documents describing a process, for files passed between commands.
//!
//! An atomic process lists its shares, `P(Z = 1)`, the outcome bound and, for
//! each compliance type, the atoms `[location, mass]` of `Y(1)` and `Y(0)`:
//!
//! ```json
//! {
//!   "schema": "late-phase/dgp/v1",
//!   "kind": "atomic",
//!   "a": 0.3, "b": 0.2, "c": 0.0, "pz": 0.5, "bound": 1.0,
//!   "laws": {
//!     "always_taker": { "treated": [[-0.9, 0.5], [0.9, 0.5]], "untreated": [[0.0, 1.0]] },
//!     ...
//!   }
//! }
//! ```
//!
//! A binary process replaces `bound` and `laws` by `treated_means` and
//! `untreated_means`, one number per type. Serialization is canonical (atoms
//! sorted by location, fixed key order), so parse-then-emit is byte-stable.

use serde::{Deserialize, Serialize};

use crate::dgp::{BinaryTheta, ComplianceType, DiscreteDist, PotentialOutcomeLaws, Theta, TypeShares};
use crate::error::{LateError, Result};
use crate::Scalar;

pub const DGP_SCHEMA: &str = "late-phase/dgp/v1";

/// One value per compliance type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerType<V> {
    pub always_taker: V,
    pub complier: V,
    pub defier: V,
    pub never_taker: V,
}

impl<V> PerType<V> {
    fn from_fn(mut f: impl FnMut(ComplianceType) -> V) -> Self {
        Self {
            always_taker: f(ComplianceType::AlwaysTaker),
            complier: f(ComplianceType::Complier),
            defier: f(ComplianceType::Defier),
            never_taker: f(ComplianceType::NeverTaker),
        }
    }

    fn get(&self, ty: ComplianceType) -> &V {
        match ty {
            ComplianceType::AlwaysTaker => &self.always_taker,
            ComplianceType::Complier => &self.complier,
            ComplianceType::Defier => &self.defier,
            ComplianceType::NeverTaker => &self.never_taker,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawPair {
    pub treated: Vec<[f64; 2]>,
    pub untreated: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    Atomic {
        a: f64,
        b: f64,
        c: f64,
        pz: f64,
        bound: f64,
        laws: PerType<LawPair>,
    },
    Binary {
        a: f64,
        b: f64,
        c: f64,
        pz: f64,
        treated_means: PerType<f64>,
        untreated_means: PerType<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpDocument {
    pub schema: String,
    #[serde(flatten)]
    pub process: Process,
}

fn atoms<T: Scalar>(d: &DiscreteDist<T>) -> Vec<[f64; 2]> {
    d.atoms()
        .iter()
        .map(|a| [a.location.as_f64(), a.mass.as_f64()])
        .collect()
}

fn dist<T: Scalar>(atoms: &[[f64; 2]], what: &str) -> Result<DiscreteDist<T>> {
    DiscreteDist::new(atoms.iter().map(|&[l, m]| (T::lit(l), T::lit(m))))
        .map_err(|e| LateError::InvalidDistribution(format!("{what}: {e}")))
}

impl DgpDocument {
    pub fn from_theta<T: Scalar>(theta: &Theta<T>) -> Self {
        let s = theta.shares();
        Self {
            schema: DGP_SCHEMA.to_string(),
            process: Process::Atomic {
                a: s.always_taker.as_f64(),
                b: s.complier.as_f64(),
                c: s.defier.as_f64(),
                pz: theta.instrument_prob().as_f64(),
                bound: theta.bound().as_f64(),
                laws: PerType::from_fn(|ty| LawPair {
                    treated: atoms(theta.treated_law(ty)),
                    untreated: atoms(theta.untreated_law(ty)),
                }),
            },
        }
    }

    pub fn from_binary<T: Scalar>(theta: &BinaryTheta<T>) -> Self {
        let s = theta.shares();
        Self {
            schema: DGP_SCHEMA.to_string(),
            process: Process::Binary {
                a: s.always_taker.as_f64(),
                b: s.complier.as_f64(),
                c: s.defier.as_f64(),
                pz: theta.instrument_prob().as_f64(),
                treated_means: PerType::from_fn(|ty| theta.treated_mean(ty).as_f64()),
                untreated_means: PerType::from_fn(|ty| theta.untreated_mean(ty).as_f64()),
            },
        }
    }

    /// Parses and checks the schema tag. Syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)
            .map_err(|e| LateError::InvalidArgument(format!("DGP document: {e}")))?;
        if doc.schema != DGP_SCHEMA {
            return Err(LateError::InvalidArgument(format!(
                "DGP document: unsupported schema '{}', expected '{DGP_SCHEMA}'",
                doc.schema
            )));
        }
        Ok(doc)
    }

    /// Canonical pretty-printed form with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("document serializes");
        out.push('\n');
        out
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.process, Process::Binary { .. })
    }

    /// The atomic process; binary documents are expanded to Bernoulli laws.
    pub fn to_theta<T: Scalar>(&self) -> Result<Theta<T>> {
        match &self.process {
            Process::Atomic {
                a,
                b,
                c,
                pz,
                bound,
                laws,
            } => {
                let shares = TypeShares::new(T::lit(*a), T::lit(*b), T::lit(*c))?;
                let mut built = Vec::with_capacity(4);
                for ty in ComplianceType::ALL {
                    let pair = laws.get(ty);
                    built.push(PotentialOutcomeLaws::new(
                        dist(&pair.treated, &format!("{}.treated", ty.name()))?,
                        dist(&pair.untreated, &format!("{}.untreated", ty.name()))?,
                    ));
                }
                let laws: [PotentialOutcomeLaws<T>; 4] =
                    built.try_into().expect("four compliance types");
                Theta::new(shares, T::lit(*pz), T::lit(*bound), laws)
            }
            Process::Binary { .. } => Ok(self.to_binary::<T>()?.to_theta()),
        }
    }

    pub fn to_binary<T: Scalar>(&self) -> Result<BinaryTheta<T>> {
        match &self.process {
            Process::Binary {
                a,
                b,
                c,
                pz,
                treated_means,
                untreated_means,
            } => BinaryTheta::new(
                TypeShares::new(T::lit(*a), T::lit(*b), T::lit(*c))?,
                T::lit(*pz),
                ComplianceType::ALL.map(|ty| T::lit(*treated_means.get(ty))),
                ComplianceType::ALL.map(|ty| T::lit(*untreated_means.get(ty))),
            ),
            Process::Atomic { .. } => Err(LateError::InvalidArgument(
                "DGP document describes an atomic process, not a binary one".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn atomic_round_trip_is_byte_stable() {
        let (theta, twin) = fixtures::builtin_twin_pair();
        for process in [theta, twin] {
            let text = DgpDocument::from_theta(&process).to_json();
            let parsed = DgpDocument::parse(&text).unwrap();
            assert_eq!(parsed.to_json(), text);
            assert_eq!(parsed.to_theta::<f64>().unwrap(), process);
        }
    }

    #[test]
    fn binary_round_trip() {
        let theta = BinaryTheta::new(
            TypeShares::new(0.3, 0.2, 0.0).unwrap(),
            0.5,
            [0.5, 0.49, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.4],
        )
        .unwrap();
        let text = DgpDocument::from_binary(&theta).to_json();
        let doc = DgpDocument::parse(&text).unwrap();
        assert!(doc.is_binary());
        assert_eq!(doc.to_binary::<f64>().unwrap(), theta);
        assert_eq!(doc.to_json(), text);
        assert_eq!(doc.to_theta::<f64>().unwrap(), theta.to_theta());
    }

    #[test]
    fn malformed_documents() {
        let err = DgpDocument::parse("{\n  \"schema\": ").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = DgpDocument::parse(r#"{"schema": "other", "kind": "binary"}"#).unwrap_err();
        assert!(err.to_string().contains("DGP document"));
    }
}
