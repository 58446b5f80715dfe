//! Tabular reports written as JSON or CSV.
//!
//! Floats are printed with 17 significant digits, non-finite values as
//! JSON `null`. Field order is the insertion order, so identical inputs
//! give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Value {
    fn json(&self, out: &mut String) {
        match self {
            Value::Num(v) if v.is_finite() => out.push_str(&fmt_float(*v)),
            Value::Num(_) | Value::Null => out.push_str("null"),
            Value::Int(i) => write!(out, "{i}").unwrap(),
            Value::Bool(b) => write!(out, "{b}").unwrap(),
            Value::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        }
    }

    fn csv(&self) -> String {
        match self {
            Value::Num(v) if v.is_finite() => fmt_float(*v),
            Value::Num(v) => v.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => s.clone(),
            Value::Null => String::new(),
        }
    }

    fn human(&self) -> String {
        match self {
            Value::Num(v) => format!("{v:.6e}"),
            other => other.csv(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A summary plus one table of per-row results.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub summary: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(command: &str, columns: Vec<String>) -> Report {
        Report { command: command.to_string(), summary: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        let value = value.into();
        match self.summary.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.summary.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n  \"command\": ");
        Value::from(self.command.as_str()).json(&mut out);
        out.push_str(",\n  \"summary\": {");
        for (i, (k, v)) in self.summary.iter().enumerate() {
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            Value::from(k.as_str()).json(&mut out);
            out.push_str(": ");
            v.json(&mut out);
        }
        out.push_str(if self.summary.is_empty() { "},\n" } else { "\n  },\n" });
        out.push_str("  \"columns\": [");
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            Value::from(c.as_str()).json(&mut out);
        }
        out.push_str("],\n  \"rows\": [");
        for (r, row) in self.rows.iter().enumerate() {
            out.push_str(if r == 0 { "\n    {" } else { ",\n    {" });
            for (i, (c, v)) in self.columns.iter().zip(row).enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                Value::from(c.as_str()).json(&mut out);
                out.push_str(": ");
                v.json(&mut out);
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Human-readable summary block.
    pub fn summary_text(&self) -> String {
        let width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = format!("{}\n", self.command);
        for (k, v) in &self.summary {
            writeln!(out, "  {k:<width$}  {}", v.human()).unwrap();
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes the rendered report to `path`, or to stdout when absent.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        let text = self.render(format);
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io { path: p.display().to_string(), source: e }),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io { path: "<stdout>".into(), source: e }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", vec!["a".into(), "b".into(), "c".into()]);
        r.set("max", 0.1);
        r.set("pass", true);
        r.push(vec![Value::Num(1.0), Value::Num(f64::NAN), Value::Str("x, \"y\"".into())]);
        r
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn json_is_valid_and_ordered() {
        let text = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["summary"]["max"], 0.1);
        assert!(v["rows"][0]["b"].is_null());
        assert_eq!(v["rows"][0]["c"], "x, \"y\"");
        assert!(text.find("\"max\"").unwrap() < text.find("\"pass\"").unwrap());
    }

    #[test]
    fn empty_report() {
        let r = Report::new("empty", vec!["a".into()]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 0);
        assert_eq!(r.to_csv(), "a\n");
    }

    #[test]
    fn summary_keys_are_replaced_in_place() {
        let mut r = sample();
        r.set("max", 0.2);
        assert_eq!(r.summary[0], ("max".to_string(), Value::Num(0.2)));
        assert_eq!(r.summary.len(), 2);
    }
}
