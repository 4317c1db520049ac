//! Report model and deterministic JSON / CSV emission.
//!
//! JSON keeps insertion order and writes reals with 12 significant digits.
//! CSV writes one table per section (`quantity,value`, units as a `[unit]`
//! suffix on the quantity), separated by blank lines and introduced by a
//! `# section` comment line.

use std::fmt::Write as _;

use crate::config::OutputFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: Value,
    /// `"1"` for dimensionless numbers, `"bool"` for flags, empty for text.
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    fn push(&mut self, key: impl Into<String>, value: Value, unit: &str) -> &mut Self {
        let key = key.into();
        debug_assert!(
            self.entries.iter().all(|e| e.key != key),
            "duplicate key {key} in section {}",
            self.name
        );
        self.entries.push(Entry {
            key,
            value,
            unit: unit.to_string(),
        });
        self
    }

    pub fn real(&mut self, key: impl Into<String>, value: f64, unit: &str) -> &mut Self {
        self.push(key, Value::Real(value), unit)
    }

    pub fn int(&mut self, key: impl Into<String>, value: i64, unit: &str) -> &mut Self {
        self.push(key, Value::Int(value), unit)
    }

    pub fn flag(&mut self, key: impl Into<String>, value: bool) -> &mut Self {
        self.push(key, Value::Flag(value), "bool")
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.push(key, Value::Text(value.into()), "")
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|e| e.key == key).map(|e| &e.value)
    }

    pub fn real_value(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Real(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn flag_value(&self, key: &str) -> Option<bool> {
        match self.get(key)? {
            Value::Flag(b) => Some(*b),
            _ => None,
        }
    }
}

/// Free-form table, e.g. a histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub title: String,
    pub sections: Vec<Section>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// 12 significant digits, exponent form; non-finite values have no JSON form.
pub fn format_real(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.11e}"))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialisation cannot fail")
}

fn json_value(v: &Value) -> String {
    match v {
        Value::Real(x) => format_real(*x).unwrap_or_else(|| "null".into()),
        Value::Int(i) => i.to_string(),
        Value::Flag(b) => b.to_string(),
        Value::Text(s) => json_string(s),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_value(v: &Value) -> String {
    match v {
        Value::Real(x) => format_real(*x).unwrap_or_else(|| x.to_string()),
        Value::Int(i) => i.to_string(),
        Value::Flag(b) => b.to_string(),
        Value::Text(s) => csv_cell(s),
    }
}

pub fn to_json(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = write!(out, "  \"title\": {},\n  \"sections\": {{", json_string(&report.title));
    for (si, section) in report.sections.iter().enumerate() {
        let _ = write!(out, "{}\n    {}: {{", if si > 0 { "," } else { "" }, json_string(&section.name));
        for (ei, e) in section.entries.iter().enumerate() {
            let _ = write!(
                out,
                "{}\n      {}: {{\"value\": {}, \"unit\": {}}}",
                if ei > 0 { "," } else { "" },
                json_string(&e.key),
                json_value(&e.value),
                json_string(&e.unit)
            );
        }
        let _ = write!(out, "\n    }}");
    }
    let _ = write!(out, "\n  }}");
    if !report.tables.is_empty() {
        let _ = write!(out, ",\n  \"tables\": {{");
        for (ti, t) in report.tables.iter().enumerate() {
            let cols: Vec<String> = t.columns.iter().map(|c| json_string(c)).collect();
            let _ = write!(
                out,
                "{}\n    {}: {{\n      \"columns\": [{}],\n      \"rows\": [",
                if ti > 0 { "," } else { "" },
                json_string(&t.name),
                cols.join(", ")
            );
            for (ri, row) in t.rows.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(json_value).collect();
                let _ = write!(out, "{}\n        [{}]", if ri > 0 { "," } else { "" }, cells.join(", "));
            }
            let _ = write!(out, "\n      ]\n    }}");
        }
        let _ = write!(out, "\n  }}");
    }
    let _ = writeln!(out, "\n}}");
    out
}

pub fn to_csv(report: &Report) -> String {
    let mut out = String::new();
    let mut first = true;
    for section in &report.sections {
        if !first {
            out.push('\n');
        }
        first = false;
        let _ = writeln!(out, "# {}", section.name);
        let _ = writeln!(out, "quantity,value");
        for e in &section.entries {
            let label = if e.unit.is_empty() {
                e.key.clone()
            } else {
                format!("{} [{}]", e.key, e.unit)
            };
            let _ = writeln!(out, "{},{}", csv_cell(&label), csv_value(&e.value));
        }
    }
    for t in &report.tables {
        if !first {
            out.push('\n');
        }
        first = false;
        let _ = writeln!(out, "# {}", t.name);
        let cols: Vec<String> = t.columns.iter().map(|c| csv_cell(c)).collect();
        let _ = writeln!(out, "{}", cols.join(","));
        for row in &t.rows {
            let cells: Vec<String> = row.iter().map(csv_value).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
    }
    out
}

pub fn emit(report: &Report, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => to_csv(report),
    }
    .into_bytes()
}
