//! Text and JSON report emission. Both formats are pure functions of the reports, so a fixed
//! scenario and seed give identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::checks::{CheckReport, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Run-level context printed above the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportHeader {
    pub scenario: String,
    pub seed: u64,
    pub sampling: String,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    scenario: &'a str,
    seed: u64,
    checks: &'a [CheckReport],
}

pub fn emit_report(header: &ReportHeader, reports: &[CheckReport], format: Format, timings: bool) -> String {
    match format {
        Format::Json => {
            let doc = JsonReport {
                scenario: &header.scenario,
                seed: header.seed,
                checks: reports,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("reports always serialize");
            s.push('\n');
            s
        }
        Format::Text => text(header, reports, timings),
    }
}

fn sci(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn point(p: &Option<Vec<f64>>) -> String {
    match p {
        None => "-".into(),
        Some(p) => {
            let parts: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
            format!("({})", parts.join(", "))
        }
    }
}

fn text(header: &ReportHeader, reports: &[CheckReport], timings: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", header.scenario);
    let _ = writeln!(out, "seed:     {}", header.seed);
    let _ = writeln!(out, "sampling: {}", header.sampling);
    out.push('\n');

    let mut rows = vec![vec![
        "check".to_string(),
        "status".into(),
        "max residual".into(),
        "tolerance".into(),
        "samples".into(),
        "worst point".into(),
    ]];
    if timings {
        rows[0].push("time".into());
    }
    for r in reports {
        let mut row = vec![
            r.name.clone(),
            r.status.as_str().to_string(),
            sci(r.max_residual),
            sci(Some(r.tolerance)),
            r.samples.to_string(),
            point(&r.worst_point),
        ];
        if timings {
            row.push(format!("{:.3}s", r.wall_time.as_secs_f64()));
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<w$}", w = widths[c]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }

    let notes: Vec<&CheckReport> = reports.iter().filter(|r| r.reason.is_some()).collect();
    if !notes.is_empty() {
        out.push('\n');
        for r in notes {
            let _ = writeln!(out, "{}: {}", r.name, r.reason.as_deref().unwrap_or_default());
        }
    }

    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let _ = writeln!(
        out,
        "\n{} checks: {} pass, {} fail, {} skipped",
        reports.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skipped)
    );
    out
}

/// 0 when nothing failed, 1 otherwise. Skipped checks do not fail a run.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    if reports.iter().any(|r| r.status == Status::Fail) {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn report(status: Status, residual: Option<f64>, reason: Option<&str>) -> CheckReport {
        CheckReport {
            name: "trace_relation".into(),
            status,
            reason: reason.map(str::to_string),
            max_residual: residual,
            tolerance: 1e-8,
            worst_point: residual.map(|_| vec![0.5, -0.25]),
            samples: 3,
            wall_time: Duration::from_millis(7),
        }
    }

    fn header() -> ReportHeader {
        ReportHeader {
            scenario: "demo".into(),
            seed: 4,
            sampling: "random 3 points".into(),
        }
    }

    #[test]
    fn single_pass_json() {
        let s = emit_report(&header(), &[report(Status::Pass, Some(0.0), None)], Format::Json, false);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["scenario"], "demo");
        assert_eq!(v["seed"], 4);
        let checks = v["checks"].as_array().unwrap();
        assert_eq!(checks.len(), 1);
        assert_eq!(checks[0]["status"], "pass");
        assert!(checks[0].get("reason").is_none());
        assert!(checks[0].get("wall_time").is_none());
        assert_eq!(checks[0]["worst_point"], serde_json::json!([0.5, -0.25]));
    }

    #[test]
    fn skipped_carries_a_reason() {
        let s = emit_report(
            &header(),
            &[report(Status::Skipped, None, Some("hypothesis unmet"))],
            Format::Json,
            false,
        );
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["checks"][0]["status"], "skipped");
        assert_eq!(v["checks"][0]["reason"], "hypothesis unmet");
        assert!(v["checks"][0]["max_residual"].is_null());
    }

    #[test]
    fn text_table_is_aligned() {
        let reports = [
            report(Status::Pass, Some(1.5e-12), None),
            CheckReport {
                name: "degeneracy(dv)".into(),
                ..report(Status::Fail, Some(2.0), Some("residual above tolerance"))
            },
        ];
        let s = emit_report(&header(), &reports, Format::Text, false);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[4].find("status"), lines[5].find("pass"));
        assert_eq!(lines[5].find("pass"), lines[6].find("fail"));
        assert!(s.contains("1.500e-12"));
        assert!(s.ends_with("2 checks: 1 pass, 1 fail, 0 skipped\n"));
        assert!(!s.contains("time"));
        assert!(emit_report(&header(), &reports, Format::Text, true).contains("0.007s"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&[]), 0);
        assert_eq!(exit_code(&[report(Status::Skipped, None, Some("x"))]), 0);
        assert_eq!(exit_code(&[report(Status::Fail, Some(1.0), None)]), 1);
    }
}
