//! JSON records printed one per line on standard output.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Outcome of `kdep test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ResultRecord {
    pub method: String,
    /// Statistic clamped at zero.
    pub statistic: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub reject: bool,
    pub n: usize,
    #[serde(rename = "D")]
    pub features: Option<usize>,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub seed: u64,
    /// Present only with `--timing`, so that default output is reproducible.
    pub wall_time_ms: Option<f64>,
    pub alpha: f64,
    pub null: String,
    pub permutations: usize,
}

/// Summary printed by `kdep sensitivity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SensitivityRecord {
    pub method: String,
    pub statistic: f64,
    pub n: usize,
    #[serde(rename = "D")]
    pub features: Option<usize>,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub seed: u64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RankRecord {
    pub criterion: String,
    pub n: usize,
    pub nf: usize,
    pub features: Vec<String>,
    pub scores: Vec<f64>,
    /// Zero-based column indices, best first.
    pub order: Vec<usize>,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CausalRecord {
    pub method: String,
    #[serde(rename = "D")]
    pub features: Option<usize>,
    pub seed: u64,
    pub pairs: usize,
    pub skipped: Vec<String>,
    pub auc_c: Option<f64>,
    pub auc_cs: Option<f64>,
    pub accuracy_c: Option<f64>,
    pub accuracy_cs: Option<f64>,
    pub files: Vec<String>,
}

pub fn to_line<T: Serialize>(record: &T) -> CliResult<String> {
    serde_json::to_string(record).map_err(|e| CliError::Input(format!("cannot encode record: {e}")))
}

/// Parses one `kdep test` output line.
pub fn parse_record(text: &str) -> CliResult<ResultRecord> {
    serde_json::from_str(text.trim()).map_err(|e| CliError::Input(format!("bad record: {e}")))
}
