//! Reader for the normalized hourly CSV:
//!
//! ```text
//! date,hour,value,station_id
//! 2015-01-05,0,62.0,28079004
//! 2015-01-05,1,,28079004
//! ```
//!
//! An empty, unparseable or negative `value` is recorded as missing. Rows
//! with a malformed date or hour are rejected and reported by line number.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 4] = ["date", "hour", "value", "station_id"];

/// Fraction of rejected rows above which ingestion fails outright.
pub const MAX_REJECTED_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyRecord {
    pub date: NaiveDate,
    pub hour: u8,
    /// Concentration in µg/m³; `None` when missing.
    pub value: Option<f64>,
    pub station_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestOutcome {
    pub records: Vec<HourlyRecord>,
    pub rejected: Vec<RejectedRow>,
    /// Cells present but unusable (unparseable or negative), turned into missing values.
    pub invalid_values: usize,
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<IngestOutcome> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file).map_err(|e| match e {
        Error::Ingest(msg) => Error::Ingest(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn ingest_reader<R: Read>(reader: R) -> Result<IngestOutcome> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv
        .headers()
        .map_err(|e| Error::Ingest(format!("cannot read header: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Ingest(format!(
            "expected header `{}`, found `{}`",
            CSV_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut out = IngestOutcome::default();
    let mut total = 0usize;
    for row in csv.records() {
        total += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                out.rejected.push(RejectedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row) {
            Ok((record, invalid)) => {
                out.invalid_values += invalid as usize;
                out.records.push(record);
            }
            Err(reason) => out.rejected.push(RejectedRow { line, reason }),
        }
    }

    if total > 0 && out.rejected.len() as f64 > MAX_REJECTED_FRACTION * total as f64 {
        let sample: Vec<String> = out
            .rejected
            .iter()
            .take(5)
            .map(|r| format!("line {}: {}", r.line, r.reason))
            .collect();
        return Err(Error::Ingest(format!(
            "{} of {total} rows malformed (limit {:.0}%); first: {}",
            out.rejected.len(),
            MAX_REJECTED_FRACTION * 100.0,
            sample.join("; ")
        )));
    }
    Ok(out)
}

/// Returns the record and whether a present value cell had to be discarded.
fn parse_row(row: &csv::StringRecord) -> std::result::Result<(HourlyRecord, bool), String> {
    if row.len() != 4 {
        return Err(format!("expected 4 fields, found {}", row.len()));
    }
    let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
        .map_err(|_| format!("invalid date `{}`", &row[0]))?;
    let hour: u8 = row[1]
        .parse()
        .ok()
        .filter(|h| *h < 24)
        .ok_or_else(|| format!("invalid hour `{}`", &row[1]))?;
    let raw = &row[2];
    let parsed = if raw.is_empty() {
        None
    } else {
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
    };
    let invalid = !raw.is_empty() && parsed.is_none();
    Ok((
        HourlyRecord {
            date,
            hour,
            value: parsed,
            station_id: row[3].to_string(),
        },
        invalid,
    ))
}
