// SPDX-License-Identifier: MIT
//! JSON and CSV reports of check results.
//!
//! Rationals are written as `p/q` strings next to a fixed-precision decimal;
//! parsing reads the `p/q` form back, so a JSON or CSV report round-trips.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CheckResult, Relation, Verdict};
use crate::error::{Error, Result};
use crate::rational::{decimal, parse_q};

const DECIMAL_DIGITS: usize = 12;
const FORMAT_NAME: &str = "fbar-check-report";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Domain(format!("unknown report format {s:?}; expected json or csv"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    id: String,
    instance: String,
    verdict: Verdict,
    relation: Relation,
    measured: String,
    measured_decimal: String,
    measured_exact: bool,
    bound: Option<String>,
    bound_decimal: Option<String>,
    hypotheses_met: bool,
    detail: String,
    #[serde(default)]
    runtime_ms: Option<u64>,
}

#[derive(Serialize, Deserialize, Default)]
struct Summary {
    checks: usize,
    pass: usize,
    fail: usize,
    vacuous: usize,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    summary: Summary,
    results: Vec<Row>,
}

impl From<&CheckResult> for Row {
    fn from(c: &CheckResult) -> Row {
        Row {
            id: c.id.clone(),
            instance: c.instance.clone(),
            verdict: c.verdict,
            relation: c.relation,
            measured: c.measured.to_string(),
            measured_decimal: decimal(&c.measured, DECIMAL_DIGITS),
            measured_exact: c.measured_exact,
            bound: c.bound.as_ref().map(|b| b.to_string()),
            bound_decimal: c.bound.as_ref().map(|b| decimal(b, DECIMAL_DIGITS)),
            hypotheses_met: c.hypotheses_met,
            detail: c.detail.clone(),
            runtime_ms: c.runtime_ms,
        }
    }
}

impl TryFrom<Row> for CheckResult {
    type Error = Error;
    fn try_from(r: Row) -> Result<CheckResult> {
        Ok(CheckResult {
            id: r.id,
            instance: r.instance,
            measured: parse_q(&r.measured)?,
            measured_exact: r.measured_exact,
            relation: r.relation,
            bound: r.bound.as_deref().filter(|b| !b.is_empty()).map(parse_q).transpose()?,
            hypotheses_met: r.hypotheses_met,
            verdict: r.verdict,
            detail: r.detail,
            runtime_ms: r.runtime_ms,
        })
    }
}

fn summary(results: &[CheckResult]) -> Summary {
    let count = |v: Verdict| results.iter().filter(|r| r.verdict == v).count();
    Summary { checks: results.len(), pass: count(Verdict::Pass), fail: count(Verdict::Fail), vacuous: count(Verdict::Vacuous) }
}

/// Renders results with a stable field order.
pub fn emit_report(results: &[CheckResult], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let doc = Document {
                format: FORMAT_NAME.into(),
                version: 1,
                summary: summary(results),
                results: results.iter().map(Row::from).collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            // header written by hand so an empty report still has one
            w.write_record([
                "id",
                "instance",
                "verdict",
                "relation",
                "measured",
                "measured_decimal",
                "measured_exact",
                "bound",
                "bound_decimal",
                "hypotheses_met",
                "detail",
                "runtime_ms",
            ])
            .map_err(csv_err)?;
            for r in results {
                w.serialize(Row::from(r)).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
        }
    }
}

/// Writes a report to `path`; I/O failures are returned, not swallowed.
pub fn write_report(results: &[CheckResult], format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, emit_report(results, format)?)?;
    Ok(())
}

/// Reads a report produced by [`emit_report`].
pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<CheckResult>> {
    match format {
        ReportFormat::Json => {
            let doc: Document = serde_json::from_str(text)?;
            if doc.format != FORMAT_NAME {
                return Err(Error::Format { line: 1, msg: format!("not a check report: format {:?}", doc.format) });
            }
            doc.results.into_iter().map(CheckResult::try_from).collect()
        }
        ReportFormat::Csv => {
            let mut rd = csv::Reader::from_reader(text.as_bytes());
            let mut out = Vec::new();
            for (i, row) in rd.deserialize::<Row>().enumerate() {
                let row = row.map_err(|e| Error::Format { line: i + 2, msg: e.to_string() })?;
                out.push(CheckResult::try_from(row)?);
            }
            Ok(out)
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Internal(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn sample() -> Vec<CheckResult> {
        vec![
            CheckResult::new("od-distance", "K=2 N=3", q(3, 8), Relation::Le, Some(q(3, 8))).inexact().detail("certified, \"quoted\""),
            CheckResult::new("fclos", "K=2", q(5, 7), Relation::Le, Some(q(1, 2))),
            CheckResult::holds("marker-readability", "N=2 M=2", true).with_hypotheses(false),
        ]
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = emit_report(&r, ReportFormat::Json).unwrap();
        assert!(text.contains("\"measured\": \"3/8\""));
        assert!(text.contains("\"measured_decimal\": \"0.375000000000\""));
        assert_eq!(parse_report(&text, ReportFormat::Json).unwrap(), r);
        assert_eq!(r[1].verdict, Verdict::Fail);
        assert_eq!(r[2].verdict, Verdict::Vacuous);
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let text = emit_report(&r, ReportFormat::Csv).unwrap();
        assert!(text.starts_with("id,instance,verdict"));
        assert_eq!(parse_report(&text, ReportFormat::Csv).unwrap(), r);
    }

    #[test]
    fn empty_documents() {
        let j = emit_report(&[], ReportFormat::Json).unwrap();
        assert!(parse_report(&j, ReportFormat::Json).unwrap().is_empty());
        let c = emit_report(&[], ReportFormat::Csv).unwrap();
        assert_eq!(c.lines().count(), 1);
        assert!(parse_report(&c, ReportFormat::Csv).unwrap().is_empty());
    }

    #[test]
    fn io_errors_surface() {
        let bad = Path::new("/nonexistent-dir/for/report.json");
        assert!(matches!(write_report(&sample(), ReportFormat::Json, bad), Err(Error::Io(_))));
    }
}
