use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::{ExperimentReport, ModeFit};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 9] = [
    "n", "cube_size", "mode", "ks", "chat_mean", "chat_sd", "sigma2", "level", "coverage",
];

/// The table as CSV. Floats use the shortest round-trip form; missing
/// level and coverage are empty cells.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.cube_size,
            r.mode.as_str(),
            r.ks,
            r.chat_mean,
            r.chat_sd,
            r.sigma2,
            opt(r.level),
            opt(r.coverage),
        ));
    }
    out
}

#[derive(Serialize)]
struct Metadata<'a> {
    columns: [&'static str; 9],
    seed_rule: &'static str,
    sigma2: f64,
    model_mean: f64,
    centre: f64,
    rate_fits: &'a [ModeFit],
    config: &'a super::ExperimentConfig,
}

/// Everything in the report except the rows, as pretty JSON.
pub fn report_metadata_json(report: &ExperimentReport) -> String {
    let meta = Metadata {
        columns: CSV_COLUMNS,
        seed_rule: "derive_seed(master_seed, [n, replicate])",
        sigma2: report.sigma2,
        model_mean: report.model_mean,
        centre: report.centre,
        rate_fits: &report.rate_fits,
        config: &report.config,
    };
    serde_json::to_string_pretty(&meta).expect("metadata serializes")
}

/// `table.csv` -> `table.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Writes the CSV table and its JSON sidecar; returns the sidecar path.
pub fn write_report(report: &ExperimentReport, csv_path: &Path) -> Result<PathBuf> {
    let write = |path: &Path, text: &str| -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    };
    write(csv_path, &report_csv(report))?;
    let meta = sidecar_path(csv_path);
    write(&meta, &report_metadata_json(report))?;
    Ok(meta)
}
