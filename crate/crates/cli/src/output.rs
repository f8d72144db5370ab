//! Rendering of command results as CSV or JSON, with the reproducibility
//! header, to a file (atomically) or stdout.

use std::path::Path;

use serde_json::{json, Map, Value};
use zetalab::io::{format_number, write_atomic, CsvTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A cell of a result table.
#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(format_number(*v)),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Summary lines, emitted as comments (CSV) or a `notes` array (JSON).
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Result of a command before rendering.
pub enum Body {
    Table(Table),
    Record(Value),
    /// Already in its own file format (zero tables).
    Raw(String),
}

impl Body {
    pub fn record<T: serde::Serialize>(v: &T) -> zetalab::Result<Self> {
        Ok(Body::Record(serde_json::to_value(v)?))
    }
}

pub struct Header {
    pub command: String,
    pub seed: Option<u64>,
    pub zeros_digest: Option<String>,
    pub timestamp: bool,
}

impl Header {
    fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("zetalab {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", self.command),
            format!("seed: {}", self.seed.map_or("none".into(), |s| s.to_string())),
            format!("zeros: {}", self.zeros_digest.as_deref().unwrap_or("none")),
        ];
        if self.timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            out.push(format!("generated: {secs}"));
        }
        out
    }

    fn json(&self) -> Value {
        let mut m = Map::new();
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), json!(self.command));
        m.insert("seed".into(), json!(self.seed));
        m.insert("zeros".into(), json!(self.zeros_digest));
        if self.timestamp {
            if let Some(l) = self.lines().last() {
                m.insert("generated".into(), json!(l.trim_start_matches("generated: ")));
            }
        }
        Value::Object(m)
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let s: Vec<String> = a.iter().map(scalar).collect();
            out.push((prefix.to_string(), s.join(" ")));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn render(body: &Body, format: Format, header: &Header) -> String {
    match (body, format) {
        (Body::Raw(text), _) => {
            let mut out: String = header.lines().iter().map(|l| format!("# {l}\n")).collect();
            out.push_str(text);
            out
        }
        (Body::Table(t), Format::Csv) => {
            let mut csv = CsvTable::new(&t.header);
            for l in header.lines().into_iter().chain(t.notes.iter().cloned()) {
                csv.comment(l);
            }
            for r in &t.rows {
                csv.push_row(r.iter().map(Cell::csv).collect());
            }
            csv.render()
        }
        (Body::Table(t), Format::Json) => {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        t.header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| (h.to_string(), c.json()))
                            .collect(),
                    )
                })
                .collect();
            let v = json!({ "meta": header.json(), "notes": t.notes, "rows": rows });
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
        (Body::Record(v), Format::Json) => {
            let v = json!({ "meta": header.json(), "result": v });
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
        (Body::Record(v), Format::Csv) => {
            let mut pairs = Vec::new();
            flatten("", v, &mut pairs);
            let mut csv = CsvTable::new(&["key", "value"]);
            for l in header.lines() {
                csv.comment(l);
            }
            for (k, x) in pairs {
                csv.push_row(vec![k, x]);
            }
            csv.render()
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> zetalab::Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            use std::io::Write;
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()?;
            Ok(())
        }
    }
}
