use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{Expectation, ExperimentConfig, OutputFormat};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Indeterminate => "INDETERMINATE",
        })
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub index: usize,
    /// Sample point as `[re, im]` pairs.
    pub point: Vec<[f64; 2]>,
    pub quantities: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub numeric_error: bool,
}

impl Row {
    pub fn new(index: usize, z: &[Complex64]) -> Self {
        Row {
            index,
            point: z.iter().map(|w| [w.re, w.im]).collect(),
            ..Row::default()
        }
    }

    pub fn quantity(&mut self, name: &str, value: f64) -> &mut Self {
        self.quantities.insert(name.to_string(), value);
        self
    }

    pub fn residual(&mut self, name: &str, value: f64) -> &mut Self {
        self.residuals.insert(name.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One declared criterion: `value` compared against `threshold`. A missing
/// value means the criterion could not be decided.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: Option<bool>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: Option<f64>, comparison: Comparison, threshold: f64) -> Self {
        let passed = value.map(|v| match comparison {
            Comparison::AtMost => v <= threshold,
            Comparison::AtLeast => v >= threshold,
        });
        Check {
            name: name.into(),
            value,
            comparison,
            threshold,
            passed,
        }
    }

    /// A criterion that is met without a finite witness, e.g. a defect
    /// vanishing to all measured orders.
    pub fn satisfied(name: impl Into<String>, comparison: Comparison, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value: None,
            comparison,
            threshold,
            passed: Some(true),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FitSummary {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction_order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction_order_stderr: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub verdict: Verdict,
    pub tolerance: f64,
    pub expect: Expectation,
    pub rows: usize,
    pub failed_rows: usize,
    /// Largest value of each residual column.
    pub max_residual: BTreeMap<String, f64>,
    pub fits: BTreeMap<String, FitSummary>,
    pub checks: Vec<Check>,
}

impl Summary {
    /// The verdict is a function of the checks alone: any failed check is a
    /// FAIL, otherwise any undecided check (or an empty run) is
    /// INDETERMINATE.
    pub fn assemble(
        rows: &[Row],
        tolerance: f64,
        expect: Expectation,
        fits: BTreeMap<String, FitSummary>,
        checks: Vec<Check>,
    ) -> Self {
        let mut max_residual = BTreeMap::new();
        for row in rows {
            for (k, &v) in &row.residuals {
                let e = max_residual.entry(k.clone()).or_insert(f64::NEG_INFINITY);
                if v > *e || v.is_nan() {
                    *e = v;
                }
            }
        }
        let verdict = if checks.iter().any(|c| c.passed == Some(false)) {
            Verdict::Fail
        } else if rows.is_empty() || checks.is_empty() || checks.iter().any(|c| c.passed.is_none()) {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        };
        Summary {
            verdict,
            tolerance,
            expect,
            rows: rows.len(),
            failed_rows: rows.iter().filter(|r| r.error.is_some()).count(),
            max_residual,
            fits,
            checks,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub summary: Summary,
    /// Kept out of the serialized report so that reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl DiagnosticsReport {
    pub fn verdict(&self) -> Verdict {
        self.summary.verdict
    }

    pub fn has_numeric_errors(&self) -> bool {
        self.rows.iter().any(|r| r.numeric_error)
    }

    /// Values of one residual column, in row order, skipping rows without it.
    pub fn residual_column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.residuals.get(name).copied()).collect()
    }

    pub fn quantity_column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.quantities.get(name).copied()).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.summary.checks.iter().find(|c| c.name == name)
    }
}

/// Shortest round-trip decimal, `null` for non-finite values.
fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("floats always serialize")
}

pub fn render(report: &DiagnosticsReport, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        OutputFormat::Csv => render_csv(report),
    }
}

fn render_csv(report: &DiagnosticsReport) -> Result<Vec<u8>> {
    let dim = report.rows.iter().map(|r| r.point.len()).max().unwrap_or(0);
    let quantities: BTreeSet<&String> = report.rows.iter().flat_map(|r| r.quantities.keys()).collect();
    let residuals: BTreeSet<&String> = report.rows.iter().flat_map(|r| r.residuals.keys()).collect();

    let mut header = vec!["index".to_string()];
    for k in 1..=dim {
        header.push(format!("z{k}_re"));
        header.push(format!("z{k}_im"));
    }
    header.extend(quantities.iter().map(|q| q.to_string()));
    header.extend(residuals.iter().map(|r| format!("residual_{r}")));
    header.push("error".into());

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in &report.rows {
        let mut rec = vec![row.index.to_string()];
        for k in 0..dim {
            match row.point.get(k) {
                Some([re, im]) => {
                    rec.push(number(*re));
                    rec.push(number(*im));
                }
                None => rec.extend([String::new(), String::new()]),
            }
        }
        for q in &quantities {
            rec.push(row.quantities.get(*q).map(|&v| number(v)).unwrap_or_default());
        }
        for r in &residuals {
            rec.push(row.residuals.get(*r).map(|&v| number(v)).unwrap_or_default());
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| crate::error::Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes the report to `destination`, or to standard output when absent.
/// Returns the number of bytes written.
pub fn emit(report: &DiagnosticsReport, format: OutputFormat, destination: Option<&Path>) -> Result<usize> {
    let bytes = render(report, format)?;
    match destination {
        Some(path) => std::fs::write(path, &bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(bytes.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentKind;

    fn empty_report() -> DiagnosticsReport {
        let config = ExperimentConfig::new(ExperimentKind::EinsteinCheck, 2);
        DiagnosticsReport {
            summary: Summary::assemble(&[], 1e-8, Expectation::Identity, BTreeMap::new(), vec![]),
            config,
            rows: vec![],
            wall_time: Duration::ZERO,
        }
    }

    #[test]
    fn empty_report_is_indeterminate_json() {
        let bytes = render(&empty_report(), OutputFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["rows"], serde_json::json!([]));
        assert_eq!(v["summary"]["verdict"], "INDETERMINATE");
        assert!(v.get("wall_time").is_none());
    }

    #[test]
    fn csv_columns_are_ordered() {
        let mut report = empty_report();
        let mut row = Row::new(0, &[Complex64::new(0.5, -0.25)]);
        row.quantity("zeta", 1.0).quantity("alpha", 2.0).residual("einstein", 1e-17);
        report.rows.push(row);
        let text = String::from_utf8(render(&report, OutputFormat::Csv).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "index,z1_re,z1_im,alpha,zeta,residual_einstein,error"
        );
        assert_eq!(lines.next().unwrap(), "0,0.5,-0.25,2.0,1.0,1e-17,");
    }

    #[test]
    fn failed_check_dominates() {
        let rows = vec![Row::new(0, &[])];
        let checks = vec![
            Check::new("a", None, Comparison::AtMost, 1.0),
            Check::new("b", Some(2.0), Comparison::AtMost, 1.0),
        ];
        let s = Summary::assemble(&rows, 1.0, Expectation::Identity, BTreeMap::new(), checks);
        assert_eq!(s.verdict, Verdict::Fail);
    }

    #[test]
    fn complex_points_serialize_as_pairs() {
        let row = Row::new(3, &[Complex64::new(0.1, 0.2)]);
        let v = serde_json::to_value(&row).unwrap();
        assert_eq!(v["point"], serde_json::json!([[0.1, 0.2]]));
    }
}
