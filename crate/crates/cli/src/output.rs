//! Tabular output as CSV or JSON lines.

use std::fmt::Write as _;
use std::str::FromStr;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Printed with 10 significant digits.
    Num(f64),
    /// Printed in shortest round-trip form.
    Exact(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    List(Vec<f64>),
    Missing,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Missing, Value::Num)
    }
}

impl From<Option<usize>> for Value {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Value::Missing, Value::from)
    }
}

fn non_finite(v: f64) -> &'static str {
    if v.is_nan() {
        "NaN"
    } else if v > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

fn plain(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-6..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// `v` rounded to 10 significant digits, without trailing zeros.
pub fn sig10(v: f64) -> String {
    if !v.is_finite() {
        return non_finite(v).to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded = f64::from_str(&format!("{v:.9e}")).unwrap_or(v);
    plain(rounded)
}

/// Shortest string that parses back to the same `f64`.
pub fn exact(v: f64) -> String {
    if !v.is_finite() {
        return non_finite(v).to_string();
    }
    plain(v)
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Num(v) => sig10(*v),
            Value::Exact(v) => exact(*v),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::List(vs) => vs.iter().map(|v| sig10(*v)).collect::<Vec<_>>().join(";"),
            Value::Missing => String::new(),
        }
    }

    fn json(&self, out: &mut String) {
        let number = |v: f64, s: String| if v.is_finite() { s } else { "null".to_string() };
        match self {
            Value::Num(v) => out.push_str(&number(*v, sig10(*v))),
            Value::Exact(v) => out.push_str(&number(*v, exact(*v))),
            Value::Int(i) => write!(out, "{i}").unwrap(),
            Value::Bool(b) => write!(out, "{b}").unwrap(),
            Value::Text(s) => out.push_str(&serde_json::to_string(s).unwrap()),
            Value::List(vs) => {
                out.push('[');
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&number(*v, sig10(*v)));
                }
                out.push(']');
            }
            Value::Missing => out.push_str("null"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(),
            Format::JsonLines => self.to_json_lines().into_bytes(),
        }
    }

    fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv_field))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push('{');
            for (i, (key, value)) in self.columns.iter().zip(row).enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push(':');
                value.json(&mut out);
            }
            out.push_str("}\n");
        }
        out
    }
}
