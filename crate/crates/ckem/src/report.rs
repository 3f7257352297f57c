//! Serializable verification and classification reports.
//!
//! Reports are deterministic for a given config and seed: field order is
//! fixed by the struct layout and no timing data is stored in the files.

use serde::Serialize;

use crate::completeness::{DomainLabel, EndpointVerdict};
use crate::geometry::BaseModel;
use crate::params::{Bound, ModelParams};

pub const REPORT_SCHEMA: &str = "ckem-report/1";

/// One named check: a residual maximum against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_abs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(name: &str, max_abs: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            max_abs,
            tolerance,
            pass: max_abs.is_finite() && max_abs <= tolerance,
        }
    }
}

/// Per-point residual record of the metric suite.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub z: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
    pub hermiticity: f64,
    pub metric_fd_defect: f64,
    pub tt_identity_defect: f64,
    pub inverse_blocks_defect: f64,
    pub det_rel_err: f64,
    pub trace_identity: [f64; 2],
    pub f_identity: [f64; 2],
    pub residual_einstein: f64,
    pub k_conf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: String,
    pub model: ModelParams,
    pub base: Option<BaseModel>,
    pub seed: u64,
    pub grid_size: usize,
    pub points: Vec<PointRecord>,
    pub checks: Vec<CheckResult>,
    pub verdict: String,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn finalize(&mut self) {
        self.verdict = if self.checks.iter().all(|c| c.pass) {
            "pass".into()
        } else {
            "fail".into()
        };
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub schema: String,
    pub case: String,
    pub lower: EndpointVerdict,
    pub upper: EndpointVerdict,
    pub t_limits: [Bound; 2],
    pub domain_label: String,
    pub domain: DomainLabel,
}
