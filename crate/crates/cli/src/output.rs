//! Result tables and their CSV / JSON serialization.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Config, Format};

/// Homogeneous numeric table for one figure panel.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub panel: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(panel: &str, columns: &[&str]) -> Self {
        Self {
            panel: panel.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for panel {}", self.panel);
        self.rows.push(row);
    }
}

/// Free-form JSON report (degeneracy scans).
#[derive(Debug, Clone)]
pub struct Report {
    pub name: String,
    pub body: serde_json::Value,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    experiment: &'a str,
    version: &'a str,
    wall_time_s: f64,
    config: &'a Config,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn file_name(config: &Config, panel: &str, ext: &str) -> String {
    format!("{}_{panel}.{ext}", config.experiment)
}

/// Writes one file per table and per report; returns the written paths.
pub fn write_all(
    dir: &Path,
    format: Format,
    config: &Config,
    tables: &[ResultTable],
    reports: &[Report],
    wall_time_s: f64,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let meta = Metadata {
        experiment: config.experiment.name(),
        version: VERSION,
        wall_time_s,
        config,
    };
    let mut written = Vec::new();
    for t in tables {
        let (ext, text) = match format {
            Format::Csv => ("csv", to_csv(t, &meta)?),
            Format::Json => ("json", to_json(t, &meta)),
        };
        let path = dir.join(file_name(config, &t.panel, ext));
        fs::write(&path, text)?;
        written.push(path);
    }
    for r in reports {
        let body = serde_json::json!({ "metadata": &meta, "report": &r.body });
        let path = dir.join(file_name(config, &r.name, "json"));
        fs::write(&path, serde_json::to_string_pretty(&body).expect("report serializes") + "\n")?;
        written.push(path);
    }
    Ok(written)
}

/// CSV with a `#` comment header carrying version, wall time and the
/// resolved config.
fn to_csv(t: &ResultTable, meta: &Metadata) -> std::io::Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# rydcav {} experiment {} panel {}\n", meta.version, meta.experiment, t.panel));
    out.push_str(&format!("# wall_time_s = {:.3}\n", meta.wall_time_s));
    out.push_str("# config:\n");
    for line in meta.config.to_toml().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|&x| number(x)))?;
    }
    let body = w.into_inner().map_err(|e| e.into_error())?;
    out.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
    Ok(out)
}

/// Shortest round-trip text, switching to exponent form for tiny or huge values.
fn number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn to_json(t: &ResultTable, meta: &Metadata) -> String {
    // JSON has no NaN; missing values become null.
    let rows: Vec<Vec<Option<f64>>> = t
        .rows
        .iter()
        .map(|r| r.iter().map(|x| x.is_finite().then_some(*x)).collect())
        .collect();
    let body = serde_json::json!({
        "metadata": meta,
        "panel": t.panel,
        "columns": t.columns,
        "rows": rows,
    });
    serde_json::to_string_pretty(&body).expect("table serializes") + "\n"
}

/// Recovers the embedded config text from a CSV written by [`write_all`].
#[cfg(test)]
pub fn embedded_config(csv_text: &str) -> String {
    let mut lines = csv_text.lines().skip_while(|l| *l != "# config:");
    lines.next();
    lines
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}
