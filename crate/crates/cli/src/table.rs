use serde_json::{json, Value};

use crate::RunConfig;

/// Version of the column layout, bumped whenever a column changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) if v.is_nan() => "nan".into(),
            Cell::Float(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            // shortest round-trip representation, exponent only when needed
            Cell::Float(v) => serde_json::to_string(v).expect("finite float"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Rows of one artifact plus free-form notes (warnings, scan results).
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn to_csv(&self, config: &RunConfig) -> String {
        let mut out = format!("# schema: {SCHEMA_VERSION}\n# config: {}\n", config_json(config));
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, config: &RunConfig) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().map(Cell::json)).collect()))
            .collect();
        let notes: Vec<Value> = self.notes.iter().map(|(k, v)| json!({ "key": k, "value": v })).collect();
        let doc = json!({
            "schema": SCHEMA_VERSION,
            "config": config,
            "columns": self.columns,
            "notes": notes,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }
}

fn config_json(config: &RunConfig) -> String {
    serde_json::to_string(config).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_render_round_trip() {
        let mut t = Table::new(&["a", "b", "c", "d"]);
        t.push(vec![Cell::Float(0.1), Cell::Float(1e-300), Cell::Float(f64::NAN), Cell::Int(3)]);
        t.note("warning", "x");
        let csv = t.to_csv(&RunConfig::default());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[2], "# warning: x");
        assert_eq!(lines[3], "a,b,c,d");
        assert_eq!(lines[4], "0.1,1e-300,nan,3");
        let doc: Value = serde_json::from_str(&t.to_json(&RunConfig::default())).unwrap();
        assert_eq!(doc["rows"][0]["c"], Value::Null);
        assert_eq!(doc["rows"][0]["b"], json!(1e-300));
    }
}
