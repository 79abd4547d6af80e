use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Experiment, ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One table cell. Non-finite floats are stored as text so both formats can
/// carry them; text never looks like a number or a boolean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Null,
}

impl Cell {
    pub fn float(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Float(x)
        } else {
            Cell::Text(format!("{x}"))
        }
    }

    pub fn int(x: u64) -> Cell {
        i64::try_from(x).map_or_else(|_| Cell::Text(x.to_string()), Cell::Int)
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Float(x) => Some(x),
            _ => None,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            // Debug keeps a fractional part or exponent, so floats read
            // back as floats.
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    fn from_csv(s: &str) -> Cell {
        if s.is_empty() {
            return Cell::Null;
        }
        if let Ok(b) = s.parse::<bool>() {
            return Cell::Bool(b);
        }
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Cell::Float(x),
            _ => Cell::Text(s.to_string()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Cell {
        Cell::int(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Cell {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: Cell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub experiment: Experiment,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metrics: Vec<Metric>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    /// A report with the experiment's header and nothing else.
    pub fn empty(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: config.experiment,
            seed: config.seed,
            config: config.clone(),
            columns: config
                .experiment
                .columns()
                .iter()
                .map(|c| c.to_string())
                .collect(),
            rows: Vec::new(),
            metrics: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub(crate) fn metric(&mut self, name: &str, value: impl Into<Cell>) {
        self.metrics.push(Metric {
            name: name.to_string(),
            value: value.into(),
        });
    }

    pub fn metric_value(&self, name: &str) -> Option<&Cell> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| &m.value)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell at `column` of the first row whose first cell is `key`.
    pub fn lookup(&self, key: &str, column: &str) -> Option<&Cell> {
        let c = self.column(column)?;
        self.rows
            .iter()
            .find(|r| matches!(&r[0], Cell::Text(t) if t == key))
            .map(|r| &r[c])
    }
}

pub fn emit(report: &ExperimentReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(&report.columns)?;
            for row in &report.rows {
                w.write_record(row.iter().map(Cell::to_csv))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
        }
    }
}

/// Reads CSV produced by [`emit`] back into `(columns, rows)`.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<Cell>>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| Ok(rec?.iter().map(Cell::from_csv).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok((columns, rows))
}

pub fn parse_json(text: &str) -> Result<ExperimentReport> {
    let report: ExperimentReport = serde_json::from_str(text)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "unsupported schema version {}",
            report.schema_version
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let cfg = ExperimentConfig::defaults(Experiment::Distinguish);
        let mut r = ExperimentReport::empty(&cfg);
        r.push_row(vec![
            "pseudo".into(),
            "first_bit".into(),
            "hash".into(),
            1000u64.into(),
            10u64.into(),
            0.5.into(),
            1.0.into(),
        ]);
        r.push_row(vec![
            "a,b \"quoted\"".into(),
            Cell::Null,
            f64::NAN.into(),
            Cell::Int(-3),
            f64::INFINITY.into(),
            1e-300.into(),
            0.1.into(),
        ]);
        r.metric("flag", true);
        r.metric("tiny", 5e-324);
        r.notes.push("note".into());
        r
    }

    #[test]
    fn empty_report_is_header_only_csv() {
        let cfg = ExperimentConfig::defaults(Experiment::Bounds);
        let csv = emit(&ExperimentReport::empty(&cfg), OutputFormat::Csv).unwrap();
        assert_eq!(
            csv,
            "n,p_samples,alpha,radius,ball_size,ball_size_log2,entropy_bound_log2,lower_bound,vacuous,exact_error\n"
        );
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = emit(&r, OutputFormat::Json).unwrap();
        assert_eq!(parse_json(&text).unwrap(), r);
        assert!(text.trim_start().starts_with("{\n  \"schema_version\": 1,"));
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let (cols, rows) = parse_csv(&emit(&r, OutputFormat::Csv).unwrap()).unwrap();
        assert_eq!(cols, r.columns);
        // NaN never equals itself, so compare the text form
        assert_eq!(rows[1][2], Cell::Text("NaN".into()));
        assert_eq!(rows[0], r.rows[0]);
        assert_eq!(rows[1][0], r.rows[1][0]);
        assert_eq!(rows[1][3..], r.rows[1][3..]);
    }

    #[test]
    fn accuracy_precedes_half_width() {
        for e in Experiment::ALL {
            let cols = e.columns();
            if let Some(a) = cols.iter().position(|c| *c == "accuracy") {
                assert_eq!(cols[a + 1], "ci99_half_width");
            }
        }
    }

    #[test]
    fn rejects_other_schema_versions() {
        let text = emit(&sample(), OutputFormat::Json)
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(parse_json(&text).is_err());
    }
}
