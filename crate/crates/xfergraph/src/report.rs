//! Side-by-side comparison of recorded runs.

use std::path::Path;

use crate::error::{Error, Result};
use crate::run::{summary_path, RunSummary, CSV_HEADER};

#[derive(Debug, Clone)]
pub struct ReportEntry {
    pub label: String,
    pub summary: RunSummary,
}

/// Load one run from its metrics CSV plus the `.summary.json` sidecar and
/// cross-check the summary totals against the column sums.
pub fn load_entry(csv_path: &Path) -> Result<ReportEntry> {
    let csv = std::fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let side = summary_path(csv_path);
    let json = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let summary: RunSummary = serde_json::from_str(&json)
        .map_err(|e| Error::Format { path: side.clone(), msg: format!("bad summary: {e}") })?;

    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_HEADER {
        return Err(Error::Format { path: csv_path.into(), msg: "unexpected CSV header".into() });
    }
    let mut rows = 0u32;
    let mut bytes = 0u64;
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Parse {
                path: csv_path.into(),
                line: i + 2,
                msg: format!("expected 12 fields, found {}", fields.len()),
            });
        }
        let field = |idx: usize| -> Result<u64> {
            fields[idx].parse().map_err(|_| Error::Parse {
                path: csv_path.into(),
                line: i + 2,
                msg: format!("bad number '{}'", fields[idx]),
            })
        };
        bytes += field(6)? + field(7)? + field(8)?;
        rows += 1;
    }
    if rows != summary.iterations || bytes != summary.total_transfer_bytes {
        return Err(Error::Consistency(format!(
            "{}: summary totals do not match CSV sums",
            csv_path.display()
        )));
    }
    let label = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| csv_path.display().to_string());
    Ok(ReportEntry { label, summary })
}

pub fn load_entries(paths: &[impl AsRef<Path>]) -> Result<Vec<ReportEntry>> {
    paths.iter().map(|p| load_entry(p.as_ref())).collect()
}

/// Render entries as a fixed-width comparison table.
pub fn render_table(entries: &[ReportEntry]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:<6} {:<12} {:<8} {:>6} {:>12} {:>14} {:>12}\n",
        "run", "algo", "engine", "priority", "iters", "ratio", "transfer", "makespan"
    ));
    for e in entries {
        let s = &e.summary;
        out.push_str(&format!(
            "{:<24} {:<6} {:<12} {:<8} {:>6} {:>12.4} {:>14} {:>12.2}\n",
            e.label,
            s.algo,
            s.engine,
            s.priority,
            s.iterations,
            s.transfer_ratio,
            s.total_transfer_bytes,
            s.total_makespan,
        ));
    }
    out
}
