use std::fmt::Write as _;

use serde_json::{Map, Value};

pub const SCHEMA: &str = "lacunary-lab/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn records(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect();
                Value::Object(obj)
            })
            .collect()
    }
}

/// Everything a subcommand produces. `config` holds every resolved setting
/// that influences the result, so a run can be repeated from its output.
pub struct Report {
    pub command: &'static str,
    pub config: Vec<(&'static str, Value)>,
    pub summary: Vec<(&'static str, Value)>,
    pub tables: Vec<Table>,
    /// Render JSON as one header object followed by one object per row of the
    /// first table.
    pub json_lines: bool,
}

impl Report {
    pub fn new(command: &'static str, config: Vec<(&'static str, Value)>) -> Self {
        Report {
            command,
            config,
            summary: Vec::new(),
            tables: Vec::new(),
            json_lines: false,
        }
    }

    pub fn set(&mut self, key: &'static str, value: impl Into<Value>) {
        self.summary.push((key, value.into()));
    }

    fn header(&self) -> Map<String, Value> {
        let mut h = Map::new();
        h.insert("schema".into(), SCHEMA.into());
        h.insert("command".into(), self.command.into());
        h.insert("config".into(), pairs(&self.config));
        h
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json if self.json_lines => self.render_json_lines(),
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_json(&self) -> String {
        let mut top = self.header();
        let mut result = match pairs(&self.summary) {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
        for t in &self.tables {
            result.insert(t.name.into(), Value::Array(t.records()));
        }
        top.insert("result".into(), Value::Object(result));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
        s.push('\n');
        s
    }

    fn render_json_lines(&self) -> String {
        let mut top = self.header();
        top.insert("result".into(), pairs(&self.summary));
        let mut s = serde_json::to_string(&Value::Object(top)).expect("serializable");
        s.push('\n');
        if let Some(t) = self.tables.first() {
            for r in t.records() {
                s.push_str(&serde_json::to_string(&r).expect("serializable"));
                s.push('\n');
            }
        }
        s
    }

    fn render_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# schema={SCHEMA}").unwrap();
        writeln!(s, "# command={}", self.command).unwrap();
        for (k, v) in &self.config {
            writeln!(s, "# config.{k}={}", cell(v)).unwrap();
        }
        for (k, v) in &self.summary {
            writeln!(s, "# result.{k}={}", cell(v)).unwrap();
        }
        for t in &self.tables {
            writeln!(s, "## {}", t.name).unwrap();
            writeln!(s, "{}", t.columns.join(",")).unwrap();
            for r in &t.rows {
                let line: Vec<String> = r.iter().map(cell).collect();
                writeln!(s, "{}", line.join(",")).unwrap();
            }
        }
        s
    }
}

fn pairs(items: &[(&'static str, Value)]) -> Value {
    Value::Object(items.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
}

/// CSV cell: bare scalars, space-separated arrays of scalars, compact JSON
/// otherwise.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            a.iter().map(cell).collect::<Vec<_>>().join(" ")
        }
        other => other.to_string(),
    }
}

/// JSON number for finite floats, `null` otherwise.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
