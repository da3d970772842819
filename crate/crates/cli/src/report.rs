use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

use skyhand_core::orchestrator::MetricsReport;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    /// Human-readable lines.
    #[default]
    Text,
    /// One JSON record per line.
    Json,
}

pub fn metrics_line(report: &MetricsReport) -> String {
    match report {
        MetricsReport::Tracing(r) => r.to_string(),
        MetricsReport::Targeting(r) => r.to_string(),
        MetricsReport::Separation { min_distance } => format!("Min pairwise distance, m {min_distance:.3}"),
    }
}

pub fn json_line<S: Serialize>(value: &S) -> CliResult<String> {
    serde_json::to_string(value).map_err(|e| CliError::runtime("serialize", e))
}

/// Writes `reports` in `format`, one per line.
pub fn write_reports<W: Write>(mut w: W, reports: &[MetricsReport], format: Format) -> CliResult<()> {
    for r in reports {
        let line = match format {
            Format::Text => metrics_line(r),
            Format::Json => json_line(r)?,
        };
        writeln!(w, "{line}").map_err(|e| CliError::runtime("write", e))?;
    }
    Ok(())
}
