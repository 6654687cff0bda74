//! Machine-readable reports, one per command, all carrying the same
//! geometry echo so that `report` can join them.

use cheeger_core::certify::{Certificate, Verdict};
use cheeger_core::oracle::TraceEntry;
use serde::{Deserialize, Serialize};

/// Parameters that determine the domain. Two reports describe the same
/// domain exactly when their echoes are equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryEcho {
    /// tube, shell, ball, square or mask.
    pub kind: String,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub outer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_file: Option<String>,
}

impl GeometryEcho {
    pub fn new(kind: &str, d: usize) -> Self {
        Self {
            kind: kind.into(),
            d,
            preset: None,
            params: Vec::new(),
            curve_file: None,
            a: None,
            r: None,
            outer: None,
            side: None,
            mask_file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timings {
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapSection {
    pub verdict: String,
    /// `a ‖κ‖∞`.
    pub sufficient_value: f64,
    pub max_curvature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_self_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSection {
    pub steps: usize,
    pub max_gram_deviation: f64,
    pub max_curvature_identity_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub samples: usize,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// `(estimate − volume) / std_error`.
    pub z_score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubeReport {
    pub command: String,
    pub geometry: GeometryEcho,
    pub cheeger: f64,
    pub curve_length: f64,
    pub cross_section: f64,
    pub volume: f64,
    pub boundary_area: f64,
    pub overlap: OverlapSection,
    pub frame: FrameSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<VolumeEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSection {
    pub grid: usize,
    pub outer_residual: f64,
    pub inner_residual: f64,
    pub max_t_abs_f: f64,
    pub delta: f64,
    pub min_slope: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceSection {
    /// `d C`.
    pub analytic: f64,
    pub points: usize,
    pub step: f64,
    pub max_fd_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellReport {
    pub command: String,
    pub geometry: GeometryEcho,
    pub cheeger: f64,
    pub constant: f64,
    pub perimeter: f64,
    pub volume: f64,
    pub profile: ProfileSection,
    pub divergence: DivergenceSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyReport {
    pub command: String,
    pub geometry: GeometryEcho,
    pub closed_form: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_file: Option<String>,
    pub certificate: Certificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifacts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub command: String,
    pub geometry: GeometryEcho,
    pub n: usize,
    pub stencil: usize,
    pub tol: f64,
    pub grid: Vec<usize>,
    pub spacing: f64,
    pub inside_cells: usize,
    pub selected_cells: usize,
    pub coverage: f64,
    pub perimeter: f64,
    pub volume: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_deviation: Option<f64>,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub artifacts: Artifacts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub verdict: Verdict,
    pub claimed: f64,
    pub min_divergence: f64,
    pub max_norm: f64,
    pub violation_margin: f64,
    pub samples: usize,
    pub sampler: String,
    pub seed: u64,
    pub h_fd: f64,
    pub eps_norm: f64,
    pub eps_div: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSummary {
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_deviation: Option<f64>,
    pub n: usize,
    pub stencil: usize,
    pub tol: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceTiming {
    pub command: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub command: String,
    pub geometry: GeometryEcho,
    pub sources: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<SourceTiming>,
}

impl From<&Certificate> for CertificateSummary {
    fn from(c: &Certificate) -> Self {
        Self {
            verdict: c.verdict,
            claimed: c.claimed,
            min_divergence: c.min_divergence,
            max_norm: c.max_norm,
            violation_margin: c.violation_margin,
            samples: c.samples,
            sampler: c.sampler.clone(),
            seed: c.seed,
            h_fd: c.h_fd,
            eps_norm: c.eps_norm,
            eps_div: c.eps_div,
        }
    }
}
