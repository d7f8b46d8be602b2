use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{NgcError, Result};

pub const CSV_HEADER: &str = "bce,log_px,log_px_stderr,mmse,err_pct,rho";

/// One evaluation record. Metrics a command does not compute stay `None`
/// and are written as empty CSV cells.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bce: Option<f64>,
    pub log_px: Option<f64>,
    pub log_px_stderr: Option<f64>,
    pub mmse: Option<f64>,
    pub err_pct: Option<f64>,
    /// Per-layer sparsity, `;`-separated in CSV.
    pub rho: Vec<f64>,
}

/// Provenance written next to every metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub config_hash: String,
    pub seed: u64,
    pub n_samples: Option<usize>,
    pub command: String,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl MetricReport {
    pub fn csv_row(&self) -> String {
        let rho: Vec<String> = self.rho.iter().map(|r| format!("{r}")).collect();
        format!(
            "{},{},{},{},{},{}",
            cell(self.bce),
            cell(self.log_px),
            cell(self.log_px_stderr),
            cell(self.mmse),
            cell(self.err_pct),
            rho.join(";")
        )
    }

    /// Writes `metrics.csv` and `metrics.json` (the provenance sidecar)
    /// into `dir`.
    pub fn write(&self, dir: &Path, meta: &ReportMeta) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| NgcError::io(dir, e))?;
        let csv = dir.join("metrics.csv");
        fs::write(&csv, format!("{CSV_HEADER}\n{}\n", self.csv_row())).map_err(|e| NgcError::io(&csv, e))?;
        let json = dir.join("metrics.json");
        let doc = serde_json::json!({ "meta": meta, "metrics": self });
        fs::write(&json, serde_json::to_string_pretty(&doc)?).map_err(|e| NgcError::io(&json, e))?;
        Ok(())
    }
}
