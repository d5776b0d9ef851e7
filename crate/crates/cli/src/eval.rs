use std::path::Path;

use anyhow::{bail, Result};
use fakemix_core::metrics::{evaluate_dataset, MetricsReport};

use crate::fsutil::atomic_bytes;

/// Evaluates `<stem>.png` predictions against ground truth and writes the
/// report as pretty JSON.
pub fn cmd_eval(pred_dir: &Path, gt_dir: &Path, classes: usize, report_path: &Path) -> Result<MetricsReport> {
    if classes < 2 {
        bail!("classes must be at least 2, got {classes}");
    }
    let report = evaluate_dataset(pred_dir, gt_dir, classes)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    atomic_bytes(report_path, json.as_bytes())?;
    Ok(report)
}
