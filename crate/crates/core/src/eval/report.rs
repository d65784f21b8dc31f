//! Evaluation report rows and their serializations.
//!
//! CSV (schema version 1) has exactly one header line followed by one line
//! per size:
//!
//! ```text
//! size,accuracy_at_1,accuracy_at_k,mean_tokens_baseline,mean_tokens_active,comparisons_active,comparisons_oracle
//! ```
//!
//! Reals are written with six decimals. The structured (JSON) form carries
//! `schema_version` and the per-position breakdown as well.

use serde::{Deserialize, Serialize};

use super::NeedlePosition;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str =
    "size,accuracy_at_1,accuracy_at_k,mean_tokens_baseline,mean_tokens_active,comparisons_active,comparisons_oracle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub size: usize,
    pub accuracy_at_1: f64,
    pub accuracy_at_k: f64,
    pub mean_tokens_baseline: f64,
    pub mean_tokens_active: f64,
    /// Mean similarity comparisons per hierarchical query.
    pub comparisons_active: f64,
    /// Comparisons an exhaustive scorer needs for this collection.
    pub comparisons_oracle: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionRow {
    pub size: usize,
    pub position: NeedlePosition,
    pub trials: usize,
    pub hits_at_1: usize,
    pub hits_at_k: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub positions: Vec<PositionRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Structured,
}

#[derive(Serialize)]
struct Structured<'a> {
    schema_version: u32,
    rows: &'a [EvalRow],
    positions: &'a [PositionRow],
}

pub fn emit_report(report: &EvalReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(CSV_HEADER.split(',')).expect("in-memory csv");
            for r in &report.rows {
                w.write_record([
                    r.size.to_string(),
                    format!("{:.6}", r.accuracy_at_1),
                    format!("{:.6}", r.accuracy_at_k),
                    format!("{:.6}", r.mean_tokens_baseline),
                    format!("{:.6}", r.mean_tokens_active),
                    format!("{:.6}", r.comparisons_active),
                    r.comparisons_oracle.to_string(),
                ])
                .expect("in-memory csv");
            }
            w.into_inner().expect("in-memory csv")
        }
        ReportFormat::Structured => {
            let mut out = serde_json::to_vec_pretty(&Structured {
                schema_version: REPORT_SCHEMA_VERSION,
                rows: &report.rows,
                positions: &report.positions,
            })
            .expect("report serializes");
            out.push(b'\n');
            out
        }
    }
}

/// Reads back the rows of a CSV report.
pub fn parse_csv_rows(bytes: &[u8]) -> Result<Vec<EvalRow>, csv::Error> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {header:?}"),
        )));
    }
    rdr.deserialize().collect()
}
