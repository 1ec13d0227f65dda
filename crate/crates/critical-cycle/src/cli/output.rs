//! Deterministic tabular export.
//!
//! CSV floats are printed with 12 significant digits (scientific notation),
//! so identical runs are byte-identical; JSON carries the unrounded values.
//! Every artifact starts with a metadata block: tool version, config hash,
//! and the tolerances that shaped the numbers.

use super::config::OutputFormat;
use serde_json::{json, Map, Value};

#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 12 significant digits, stable across platforms.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.11e}")
    }
}

fn cell_csv(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => fmt_float(*v),
        Cell::Text(v) => v.clone(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Int(v) => json!(v),
        Cell::Float(v) if v.is_finite() => json!(v),
        Cell::Float(v) => Value::String(fmt_float(*v)),
        Cell::Text(v) => Value::String(v.clone()),
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    /// Ordered `(key, value)` header entries.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Named summary blocks (fits, distribution diagnostics).
    pub summaries: Vec<(String, Vec<(&'static str, Cell)>)>,
}

impl Table {
    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        for (name, fields) in &self.summaries {
            let body: Vec<String> = fields
                .iter()
                .map(|(k, c)| format!("{k}={}", cell_csv(c)))
                .collect();
            out.push_str(&format!("# {name}: {}\n", body.join(" ")));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell_csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let mut meta = Map::new();
        for (k, v) in &self.metadata {
            meta.insert(k.clone(), Value::String(v.clone()));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Array(row.iter().map(cell_json).collect()))
            .collect();
        let summaries: Vec<Value> = self
            .summaries
            .iter()
            .map(|(name, fields)| {
                let mut obj = Map::new();
                obj.insert("name".to_string(), Value::String(name.clone()));
                for (k, c) in fields {
                    obj.insert(k.to_string(), cell_json(c));
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "metadata": Value::Object(meta),
            "columns": self.columns,
            "rows": rows,
            "summaries": summaries,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("tables are always serializable");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_fixed_width_significand() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table {
            columns: vec!["k", "p"],
            ..Default::default()
        };
        t.meta("version", "1.0");
        t.rows.push(vec![Cell::Int(-1), Cell::Float(0.25)]);
        let text = t.render(OutputFormat::Csv);
        assert_eq!(text, "# version: 1.0\nk,p\n-1,2.50000000000e-1\n");
    }

    #[test]
    fn json_round_trips_unrounded() {
        let mut t = Table {
            columns: vec!["x"],
            ..Default::default()
        };
        let v = 0.1234567890123456789;
        t.rows.push(vec![Cell::Float(v)]);
        let text = t.render(OutputFormat::Json);
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["rows"][0][0].as_f64().unwrap(), v);
    }
}
