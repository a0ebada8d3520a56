//! Machine-readable documents emitted by the commands.

use serde::{Deserialize, Serialize};

use late_phase::adversarial::{BinaryMembershipFlags, MembershipFlags, Truncation};
use late_phase::boundary::BoundaryReport;
use late_phase::document::DgpDocument;
use late_phase::estimation::{BootstrapCI, Estimates};
use late_phase::simulation::{ConsistencyReport, TwinExperimentReport};

use crate::input::sha256_hex;

pub const ANALYSIS_SCHEMA: &str = "late-phase/analysis/v1";
pub const FORGE_SCHEMA: &str = "late-phase/forge/v1";
pub const AUDIT_SCHEMA: &str = "late-phase/audit/v1";
pub const SIMULATION_SCHEMA: &str = "late-phase/simulation/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Path as given on the command line; `-` for stdin, absent when the
    /// command reads no file.
    pub input: Option<String>,
    pub input_sha256: Option<String>,
    /// SHA-256 of the canonical JSON of every option that affects the result.
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub tool_version: String,
}

impl Provenance {
    pub fn new<C: Serialize>(
        input: Option<(&str, &[u8])>,
        config: &C,
        seed: Option<u64>,
    ) -> Self {
        let canonical = serde_json::to_vec(config).expect("config serializes");
        Self {
            input: input.map(|(p, _)| p.to_string()),
            input_sha256: input.map(|(_, bytes)| sha256_hex(bytes)),
            config_sha256: sha256_hex(&canonical),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// What the boundary classification was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Population values or point estimates.
    PointEstimate,
    /// Least favourable end of the bootstrap interval for beta. This goes
    /// beyond classifying at point estimates and is labeled as an extension.
    CiWorstEndpointExtension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledBoundary {
    pub basis: Basis,
    #[serde(flatten)]
    pub report: BoundaryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Estimates>,
    /// `|beta| (k1 - k2)`, when defined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<f64>,
    pub boundary_reports: Vec<LabeledBoundary>,
    pub bootstrap: Vec<BootstrapCI>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Membership {
    Continuous(MembershipFlags),
    Binary(BinaryMembershipFlags),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub equivalence_distance: f64,
    pub c_tilde: f64,
    pub mu1_base: f64,
    pub mu1_twin: f64,
    pub mu2_twin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2_alternative_reading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    pub membership: Membership,
    pub membership_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgeDocument {
    pub schema: String,
    pub construction: String,
    pub twin: DgpDocument,
    pub certificate: Certificate,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditDocument {
    pub schema: String,
    pub equivalence_distance: f64,
    pub tolerance: f64,
    pub equivalent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<MembershipFlags>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_clauses: Vec<String>,
    pub mu1_base: Option<f64>,
    pub mu1_twin: Option<f64>,
    pub passed: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub experiments: Vec<TwinExperimentReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyReport>,
    pub provenance: Provenance,
}

/// Pretty JSON with a trailing newline; the form every command emits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
