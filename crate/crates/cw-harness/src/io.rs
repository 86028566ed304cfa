//! Sample CSV schema and report file writers.
//!
//! Sample CSV: one header row labeling each column `g<group>_v<voter>`
//! (0-based), then one data row per observation with entries `1`/`-1`
//! (or `1`/`0` when zero-one coding is enabled: 0 maps to -1). The writer
//! and the reader round-trip bit-exactly.
//!
//! Report CSVs start with `# key = value` comment lines embedding the
//! resolved configuration and library version, then a header row and data
//! rows. All floats print in Rust's shortest round-trip form.

use cw_core::{SampleMatrix, StatisticVector};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    FieldCount {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}:{column}: entry `{value}` is not a valid vote")]
    Domain {
        path: String,
        line: usize,
        column: usize,
        value: String,
    },
    #[error("{path}: bad header field `{field}` (expected g<group>_v<voter>)")]
    Header { path: String, field: String },
    #[error("{path}: header names non-contiguous groups")]
    GroupOrder { path: String },
    #[error("{path}: file has no data rows")]
    Empty { path: String },
    #[error("{0}")]
    Sample(cw_core::SampleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Vote entry coding for [`read_sample_csv`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoteCoding {
    /// Entries are `1` / `-1`.
    PlusMinus,
    /// Entries are `1` / `0`; `0` decodes to `-1`.
    ZeroOne,
}

/// Write a sample to CSV in the schema above (always `1`/`-1` entries).
pub fn write_sample_csv(path: &Path, sample: &SampleMatrix) -> Result<(), CsvError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = Vec::new();
    for g in 0..sample.group_count() {
        for v in 0..sample.k_obs(g) {
            header.push(format!("g{g}_v{v}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for t in 0..sample.n_obs() {
        let mut first = true;
        for g in 0..sample.group_count() {
            for &e in sample.row(g, t) {
                if !first {
                    out.write_all(b",")?;
                }
                first = false;
                out.write_all(if e == 1 { b"1" } else { b"-1" })?;
            }
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a sample CSV back into a validated [`SampleMatrix`].
pub fn read_sample_csv(path: &Path, coding: VoteCoding) -> Result<SampleMatrix, CsvError> {
    let text = std::fs::read_to_string(path)?;
    let p = path.display().to_string();
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| CsvError::Empty { path: p.clone() })?;
    // Header gives the per-group column counts.
    let mut widths: Vec<usize> = Vec::new();
    for field in header.split(',') {
        let bad = || CsvError::Header {
            path: p.clone(),
            field: field.to_string(),
        };
        let rest = field.trim().strip_prefix('g').ok_or_else(bad)?;
        let (group, voter) = rest.split_once("_v").ok_or_else(bad)?;
        let group: usize = group.parse().map_err(|_| bad())?;
        let voter: usize = voter.parse().map_err(|_| bad())?;
        if group == widths.len() {
            widths.push(0);
        }
        if group + 1 != widths.len() || voter != widths[group] {
            return Err(CsvError::GroupOrder { path: p });
        }
        widths[group] += 1;
    }
    let total: usize = widths.iter().sum();

    let mut columns: Vec<Vec<i8>> = widths.iter().map(|_| Vec::new()).collect();
    let mut n_obs = 0usize;
    for (idx, row) in lines {
        let line = idx + 1;
        if row.trim().is_empty() {
            continue;
        }
        let mut count = 0usize;
        for (col, field) in row.split(',').enumerate() {
            count += 1;
            if count > total {
                break;
            }
            let entry = match (field.trim(), coding) {
                ("1", _) => 1i8,
                ("-1", VoteCoding::PlusMinus) => -1,
                ("0", VoteCoding::ZeroOne) => -1,
                (other, _) => {
                    return Err(CsvError::Domain {
                        path: p,
                        line,
                        column: col + 1,
                        value: other.to_string(),
                    })
                }
            };
            // locate the group this flat column belongs to
            let mut g = 0;
            let mut offset = col;
            while offset >= widths[g] {
                offset -= widths[g];
                g += 1;
            }
            columns[g].push(entry);
        }
        if count != total {
            return Err(CsvError::FieldCount {
                path: p,
                line,
                expected: total,
                found: count,
            });
        }
        n_obs += 1;
    }
    if n_obs == 0 {
        return Err(CsvError::Empty { path: p });
    }

    SampleMatrix::from_blocks(n_obs, widths.into_iter().zip(columns).collect())
        .map_err(CsvError::Sample)
}

/// A report CSV under construction: config preamble, header, rows.
pub struct ReportCsv {
    buffer: String,
    columns: usize,
}

impl ReportCsv {
    pub fn new(meta: &BTreeMap<String, String>, header: &[&str]) -> Self {
        let mut buffer = String::new();
        buffer.push_str(&format!("# version = {}\n", env!("CARGO_PKG_VERSION")));
        for (k, v) in meta {
            buffer.push_str(&format!("# {k} = {v}\n"));
        }
        buffer.push_str(&header.join(","));
        buffer.push('\n');
        Self {
            buffer,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width mismatch");
        self.buffer.push_str(&fields.join(","));
        self.buffer.push('\n');
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, &self.buffer)
    }
}

/// Serialize a report value as pretty JSON with the version and resolved
/// config embedded, deterministically.
pub fn write_json_report<T: serde::Serialize>(
    path: &Path,
    meta: &BTreeMap<String, String>,
    body: &T,
) -> anyhow::Result<()> {
    let mut value = serde_json::to_value(body)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| anyhow::anyhow!("report body must serialize to an object"))?;
    obj.insert(
        "version".into(),
        serde_json::Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    obj.insert("config".into(), serde_json::to_value(meta)?);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Statistics of a sample as display fields (used by the estimate report).
pub fn statistic_fields(stats: &StatisticVector) -> Vec<f64> {
    stats.groups.iter().map(|g| g.value).collect()
}
