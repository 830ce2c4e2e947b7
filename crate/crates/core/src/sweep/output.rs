use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::config::OutputFormat;
use super::record::ResultRecord;
use crate::error::{domain, Error, Result};

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 14] = [
    "engine",
    "n_sites",
    "gamma",
    "h",
    "beta",
    "delta",
    "tunneling",
    "coupling",
    "p_tr",
    "t_star",
    "m_z",
    "dptr_dh",
    "status",
    "wall_time_s",
];

/// Columns appended in cross-check mode.
pub const CROSS_CHECK_COLUMNS: [&str; 2] = ["p_tr_ed", "cross_check_diff"];

/// Provenance written ahead of CSV data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableHeader {
    pub version: String,
    pub config_hash: String,
}

impl TableHeader {
    pub fn line(&self) -> String {
        format!("# simulate {} config_hash={}", self.version, self.config_hash)
    }
}

/// 17 significant digits.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn io_err(path: &str, e: std::io::Error) -> Error {
    Error::Io {
        path: path.into(),
        source: e,
    }
}

fn csv_err(path: &str, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => io_err(path, e),
        other => Error::Io {
            path: path.into(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

/// Writes `records` to `out`; `label` names the destination in errors.
pub fn write_table<W: Write>(
    records: &[ResultRecord],
    format: OutputFormat,
    header: &TableHeader,
    mut out: W,
    label: &str,
) -> Result<()> {
    if records.is_empty() {
        return Err(domain("no records to write"));
    }
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, records).map_err(|e| io_err(label, e.into()))?;
            writeln!(out).map_err(|e| io_err(label, e))?;
        }
        OutputFormat::Csv => {
            writeln!(out, "{}", header.line()).map_err(|e| io_err(label, e))?;
            let cross = records.iter().any(|r| r.cross_check.is_some());
            let mut w = csv::Writer::from_writer(&mut out);
            let mut head: Vec<&str> = CSV_COLUMNS.to_vec();
            if cross {
                head.extend(CROSS_CHECK_COLUMNS);
            }
            w.write_record(&head).map_err(|e| csv_err(label, e))?;
            for r in records {
                let mut row = vec![
                    r.engine.to_string(),
                    r.n_sites.to_string(),
                    float(r.gamma),
                    float(r.h),
                    float(r.beta),
                    float(r.delta),
                    float(r.tunneling),
                    float(r.coupling),
                    opt(r.p_tr),
                    opt(r.t_star),
                    opt(r.m_z),
                    opt(r.dptr_dh),
                    r.status.clone(),
                    opt(r.wall_time_s),
                ];
                if cross {
                    let cc = r.cross_check.as_ref();
                    row.push(opt(cc.and_then(|c| c.p_tr_ed)));
                    row.push(opt(cc.and_then(|c| c.difference)));
                }
                w.write_record(&row).map_err(|e| csv_err(label, e))?;
            }
            w.flush().map_err(|e| io_err(label, e))?;
        }
    }
    out.flush().map_err(|e| io_err(label, e))
}

/// Writes to `path`, or stdout when `None`.
pub fn emit_table(
    records: &[ResultRecord],
    format: OutputFormat,
    header: &TableHeader,
    path: Option<&Path>,
) -> Result<()> {
    match path {
        Some(p) => {
            let label = p.display().to_string();
            let file = File::create(p).map_err(|e| io_err(&label, e))?;
            write_table(records, format, header, BufWriter::new(file), &label)
        }
        None => write_table(records, format, header, std::io::stdout().lock(), "<stdout>"),
    }
}

/// Reads a JSON table written by [`emit_table`].
pub fn read_json(path: &Path) -> Result<Vec<ResultRecord>> {
    let label = path.display().to_string();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| io_err(&label, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
