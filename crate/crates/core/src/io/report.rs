//! JSON and CSV rendering of results.
//!
//! JSON documents have the shape
//! `{"tool_version": ..., "config": {...}, "results": ...}`. Floats are written
//! in shortest round-trip form, so reading a document back reproduces every
//! number bit for bit; non-finite values use the string spellings from
//! [`extended_float`](super::extended_float).
//!
//! CSV output has one row per (axis point, metric) under the header
//! `report,axis_label,axis_value,metric,value`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{ExperimentReport, ScoreReport};
use crate::baselines::PrecisionRecall;
use crate::error::{Error, Result};
use crate::estimators::Estimate;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Domain(format!("unknown report format `{other}`"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument<R> {
    pub tool_version: String,
    pub config: Value,
    pub results: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub report: String,
    pub axis_label: String,
    pub axis_value: Option<f64>,
    pub metric: String,
    pub value: f64,
}

impl CsvRow {
    fn single(report: impl Into<String>, metric: impl Into<String>, value: f64) -> Self {
        Self {
            report: report.into(),
            axis_label: String::new(),
            axis_value: None,
            metric: metric.into(),
            value,
        }
    }
}

/// Anything that can be written as a report.
pub trait Report: Serialize {
    fn csv_rows(&self) -> Vec<CsvRow>;
}

impl Report for ExperimentReport {
    fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::with_capacity(self.axis.len() * self.series.len());
        for (a, &x) in self.axis.iter().enumerate() {
            for (name, values) in &self.series {
                rows.push(CsvRow {
                    report: self.experiment.clone(),
                    axis_label: self.axis_label.clone(),
                    axis_value: Some(x),
                    metric: name.clone(),
                    value: values[a],
                });
            }
        }
        rows
    }
}

impl Report for Estimate {
    fn csv_rows(&self) -> Vec<CsvRow> {
        let name = self.estimator.as_str();
        vec![
            CsvRow::single(name, "estimated_population", self.estimated_population),
            CsvRow::single(name, "accuracy_loss", self.accuracy_loss),
            CsvRow::single(name, "score", self.score),
        ]
    }
}

impl Report for PrecisionRecall {
    fn csv_rows(&self) -> Vec<CsvRow> {
        vec![
            CsvRow::single("impar", "precision", self.precision),
            CsvRow::single("impar", "recall", self.recall),
        ]
    }
}

impl Report for ScoreReport {
    fn csv_rows(&self) -> Vec<CsvRow> {
        self.values()
            .into_iter()
            .map(|(metric, v)| CsvRow::single("score", metric, v))
            .collect()
    }
}

/// Named scalar results, e.g. one correlation per method.
impl Report for BTreeMap<String, f64> {
    fn csv_rows(&self) -> Vec<CsvRow> {
        self.iter()
            .map(|(k, &v)| CsvRow::single("results", k.clone(), v))
            .collect()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_report<R: Report>(
    report: &R,
    config: &Value,
    format: ReportFormat,
) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let doc = ReportDocument {
                tool_version: TOOL_VERSION.to_string(),
                config: config.clone(),
                results: report,
            };
            let mut text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::NumericalFailure(format!("cannot serialize report: {e}")))?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => {
            let mut text = String::from("report,axis_label,axis_value,metric,value\n");
            for row in report.csv_rows() {
                let axis = row.axis_value.map(|v| v.to_string()).unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_field(&row.report),
                    csv_field(&row.axis_label),
                    axis,
                    csv_field(&row.metric),
                    row.value
                ));
            }
            Ok(text)
        }
    }
}

pub fn write_report<R: Report>(
    report: &R,
    config: &Value,
    path: &Path,
    format: ReportFormat,
) -> Result<()> {
    let text = render_report(report, config, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
