//! Report serialization and SVG plots.

mod svg;
mod table;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::EvalReport;

pub use svg::{abnormal_runs, emit_curve_plot, emit_sweep_plot, Panel, PlotSpec};
pub use table::report_to_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Tab-separated sections with fixed column order.
    Table,
    /// Pretty-printed JSON; reads back into an equal [`EvalReport`].
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" | "tsv" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

pub fn report_to_string(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => report_to_table(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

pub fn write_report(report: &EvalReport, path: &Path, format: ReportFormat) -> Result<()> {
    fs::write(path, report_to_string(report, format)).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::ParseError {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Write an SVG document produced by one of the plot emitters.
pub fn write_svg(path: &Path, document: &str) -> Result<()> {
    fs::write(path, document).map_err(|e| Error::io(path, e))
}
