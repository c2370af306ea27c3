use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::suite::SuiteReport;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format {other:?}, expected json or csv")),
        }
    }
}

const CSV_HEADER: [&str; 10] = [
    "scenario",
    "identity",
    "convention",
    "state",
    "point_index",
    "residual",
    "scale",
    "relative",
    "tolerance",
    "verdict",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_report(report: &SuiteReport, format: ReportFormat) -> Result<String, HarnessError> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| HarnessError::Parse(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => render_csv(report),
    }
}

fn render_csv(report: &SuiteReport) -> Result<String, HarnessError> {
    let csv_err = |e: csv::Error| HarnessError::Parse(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for check in &report.checks {
        let r = &check.report;
        let label = r.label();
        let conv = r.identity.convention.name();
        let verdict = r.verdict.name();
        let tol = num(r.tolerance);
        if r.entries.is_empty() {
            w.write_record([
                report.scenario.as_str(),
                &label,
                conv,
                &check.state,
                "",
                &num(r.residual_norm),
                &num(r.scale),
                &num(r.relative),
                &tol,
                verdict,
            ])
            .map_err(csv_err)?;
        }
        for e in &r.entries {
            w.write_record([
                report.scenario.as_str(),
                &label,
                conv,
                &check.state,
                &e.point_index.to_string(),
                &num(e.residual),
                &num(e.scale),
                &num(e.relative),
                &tol,
                verdict,
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Parse(e.to_string()))
}

/// Writes `<dir>/<scenario>.<ext>` and returns the path.
pub fn emit_report(report: &SuiteReport, format: ReportFormat, dir: &Path) -> Result<PathBuf, HarnessError> {
    let io = |path: &Path, e: std::io::Error| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = dir.join(format!("{}.{}", report.scenario, format.extension()));
    let text = render_report(report, format)?;
    std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(path)
}
