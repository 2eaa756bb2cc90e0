use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    #[serde(rename = "Phi")]
    pub phi_po: f64,
    pub w_hat_norm: f64,
    pub phi: f64,
    pub ao_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub c: f64,
    /// Empirical `P(Phi < c)`.
    pub po_cdf: f64,
    /// Empirical `P(phi <= c)`.
    pub ao_cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub claim_id: String,
    pub pass: bool,
    /// Distance to failure; negative when the claim fails.
    pub margin: f64,
}

impl Verdict {
    pub fn from_margin(claim_id: &str, margin: f64) -> Self {
        Self {
            claim_id: claim_id.to_string(),
            pass: margin >= 0.0,
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub claim_id: String,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_nse_empirical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_nse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_residual_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_residual_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_relative_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_linear_regime: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ao_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ao_stderr: Option<f64>,
    pub unconverged_trials: usize,
    pub bound_exceeded_trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub k: usize,
    pub n: usize,
    pub omega_hat: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    pub per_trial: Vec<TrialRecord>,
    pub cdf_grid_values: Vec<CdfPoint>,
    pub verdicts: Vec<Verdict>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub width_table: Vec<WidthRow>,
}

pub const CSV_HEADER: &str = "trial_index,Phi,w_hat_norm,phi,ao_norm,converged";
pub const WIDTH_CSV_HEADER: &str = "k,n,omega_hat,stderr,bound,pass";

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numeric(format!("report serialization failed: {e}")))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Per-trial table with the header [`CSV_HEADER`].
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.per_trial {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.trial_index, r.phi_po, r.w_hat_norm, r.phi, r.ao_norm, r.converged
            );
        }
        out
    }
}

/// Width rows with the header [`WIDTH_CSV_HEADER`].
pub fn width_csv(rows: &[WidthRow]) -> String {
    let mut out = String::from(WIDTH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.k, r.n, r.omega_hat, r.stderr, r.bound, r.pass);
    }
    out
}
