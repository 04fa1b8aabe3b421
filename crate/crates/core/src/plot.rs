//! Emits a standalone matplotlib script that renders `mean_ratio` against `n`
//! with standard-error bars from an ensemble CSV.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Columns the generated script reads.
pub const PLOT_COLUMNS: [&str; 4] = ["n", "samples", "mean_ratio", "std_ratio"];

fn py_str(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('\'', "\\'");
    format!("'{escaped}'")
}

/// Script text for `csv_path`; the figure is written next to `out_path` as PNG.
pub fn plot_script(csv_path: &Path, out_path: &Path) -> String {
    let png = out_path.with_extension("png");
    format!(
        r#"#!/usr/bin/env python3
# Renders mean_ratio against n with std_ratio / sqrt(samples) error bars.
import csv
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv}
PNG_PATH = {png}

ns, means, errs = [], [], []
with open(CSV_PATH, newline="") as fh:
    for row in csv.DictReader(fh):
        ns.append(int(row["n"]))
        means.append(float(row["mean_ratio"]))
        errs.append(float(row["std_ratio"]) / math.sqrt(float(row["samples"])))

fig, ax = plt.subplots(figsize=(7.2, 5.04))
ax.errorbar(ns, means, yerr=errs, fmt="o-", capsize=3, label="mean Val / (sqrt(R_n ln n) / 2^n)")
ax.set_xlabel("n")
ax.set_ylabel("mean normalized entangled value")
ax.legend()
fig.tight_layout()
fig.savefig(PNG_PATH, dpi=150, metadata={{"Software": None}})
"#,
        csv = py_str(&csv_path.display().to_string()),
        png = py_str(&png.display().to_string()),
    )
}

/// Validates the CSV header, writes the script to `out_path`, and returns it.
pub fn emit_plot_script(csv_path: &Path, out_path: &Path) -> Result<String> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let headers = reader.headers()?;
    let missing: Vec<String> = PLOT_COLUMNS
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing));
    }
    let script = plot_script(csv_path, out_path);
    fs::write(out_path, &script)?;
    Ok(script)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_references_columns_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("fig.csv");
        fs::write(
            &csv,
            crate::ensemble::CSV_HEADER.join(",") + "\n10,5,1,0.5,0.9,0.1,0.8,1.0,1.0,,\n",
        )
        .unwrap();
        let out = dir.path().join("fig.py");
        let script = emit_plot_script(&csv, &out).unwrap();
        for col in PLOT_COLUMNS {
            assert!(script.contains(&format!("row[\"{col}\"]")), "{col}");
        }
        assert_eq!(fs::read_to_string(&out).unwrap(), script);
        assert!(script.contains("fig.png"));
        assert_eq!(emit_plot_script(&csv, &out).unwrap(), script);
    }

    #[test]
    fn missing_mean_ratio() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("bad.csv");
        fs::write(&csv, "n,samples,std_ratio\n10,5,0.1\n").unwrap();
        let err = emit_plot_script(&csv, &dir.path().join("x.py")).unwrap_err();
        assert!(matches!(err, Error::MissingColumns(c) if c == vec!["mean_ratio".to_string()]));
    }
}
