//! Report rows, overall status and the JSON / CSV writers.

use std::io::Write;

use serde::Serialize;

use crate::args::Format;

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 16] = [
    "case",
    "lambda",
    "mu",
    "j",
    "k",
    "delta",
    "x",
    "y",
    "analytic",
    "variant",
    "p_hat",
    "stderr",
    "z",
    "paper_theoretical",
    "paper_simulated",
    "flags",
];

/// One line of a report. Fields that do not apply are left empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub case: String,
    pub lambda: f64,
    pub mu: f64,
    pub j: Option<u32>,
    pub k: Option<u32>,
    pub delta: Option<i64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub analytic: Option<f64>,
    pub variant: String,
    pub p_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub z: Option<f64>,
    pub paper_theoretical: Option<f64>,
    pub paper_simulated: Option<f64>,
    /// Ledger codes joined with ';'.
    pub flags: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Consistent,
    /// Only disagreements already recorded as known discrepancies.
    Ledgered,
    Unexpected,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Consistent => 0,
            Status::Ledgered => 2,
            Status::Unexpected => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub status: Status,
    pub rows: Vec<Row>,
    pub detail: serde_json::Value,
    #[serde(skip)]
    pub summary: String,
}

pub fn write_report(outcome: &Outcome, format: Format, w: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, outcome)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            if outcome.rows.is_empty() {
                csv.write_record(CSV_COLUMNS)?;
            }
            for row in &outcome.rows {
                csv.serialize(row)?;
            }
            csv.flush()
        }
    }
}

/// Short fixed-width rendering for the human summary.
pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.6}"),
        Some(v) => format!("{v}"),
        None => "-".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_matches_columns() {
        let outcome = Outcome {
            command: "analytic",
            status: Status::Consistent,
            rows: vec![Row { case: "1".into(), lambda: 1.0, mu: 2.0, ..Default::default() }],
            detail: serde_json::Value::Null,
            summary: String::new(),
        };
        let mut buf = Vec::new();
        write_report(&outcome, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().nth(1).unwrap(), "1,1.0,2.0,,,,,,,,,,,,,");
    }

    #[test]
    fn empty_csv_still_has_header() {
        let outcome = Outcome {
            command: "x",
            status: Status::Consistent,
            rows: vec![],
            detail: serde_json::Value::Null,
            summary: String::new(),
        };
        let mut buf = Vec::new();
        write_report(&outcome, Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Consistent.exit_code(), 0);
        assert_eq!(Status::Ledgered.exit_code(), 2);
        assert_eq!(Status::Unexpected.exit_code(), 3);
        assert!(Status::Unexpected > Status::Ledgered);
    }
}
