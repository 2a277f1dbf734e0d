use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::EvalReport;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "table" => Ok(Self::Table),
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::MissingField(format!("report format `{other}` (table, json or csv)"))),
        }
    }
}

/// Method and backbone columns of a table row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowLabels {
    pub method: String,
    pub backbone: String,
}

impl RowLabels {
    pub fn new(method: impl Into<String>, backbone: impl Into<String>) -> Self {
        Self { method: method.into(), backbone: backbone.into() }
    }
}

impl Default for RowLabels {
    fn default() -> Self {
        Self::new("Proposed", "-")
    }
}

const HEADER: [&str; 5] = ["Method", "Backbone", "AP", "AP50", "AP75"];

fn table_line(out: &mut String, cells: [&str; 5]) {
    writeln!(out, "{:<12} {:<14} {:>6} {:>6} {:>6}", cells[0], cells[1], cells[2], cells[3], cells[4]).unwrap();
}

/// Fixed-width table with one row per report.
pub fn render_table(rows: &[(RowLabels, &EvalReport)]) -> String {
    let mut out = String::new();
    table_line(&mut out, HEADER);
    for (labels, r) in rows {
        let (ap, ap50, ap75) = (format!("{:.3}", r.ap), format!("{:.3}", r.ap50), format!("{:.3}", r.ap75));
        table_line(&mut out, [&labels.method, &labels.backbone, &ap, &ap50, &ap75]);
    }
    out
}

#[derive(Serialize)]
struct CurvePoint {
    iou_threshold: f64,
    ap: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    method: &'a str,
    backbone: &'a str,
    #[serde(rename = "AP")]
    ap: f64,
    #[serde(rename = "AP50")]
    ap50: f64,
    #[serde(rename = "AP75")]
    ap75: f64,
    #[serde(rename = "per_class_AP")]
    per_class_ap: Vec<(u64, f64)>,
    curve: Vec<CurvePoint>,
}

pub fn render_report(r: &EvalReport, format: ReportFormat, labels: &RowLabels) -> String {
    match format {
        ReportFormat::Table => render_table(&[(labels.clone(), r)]),
        ReportFormat::Json => {
            let doc = JsonReport {
                method: &labels.method,
                backbone: &labels.backbone,
                ap: r.ap,
                ap50: r.ap50,
                ap75: r.ap75,
                per_class_ap: r.per_class_ap.iter().map(|(&c, &ap)| (c, ap)).collect(),
                curve: r.curve.iter().map(|&(t, ap)| CurvePoint { iou_threshold: t, ap }).collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from("iou_threshold,ap\n");
            for (t, ap) in &r.curve {
                writeln!(out, "{t:.2},{ap:.6}").unwrap();
            }
            out
        }
    }
}
