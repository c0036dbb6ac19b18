//! Machine-readable reports with deterministic serialization: sorted
//! keys and fixed 12-significant-digit numeric formatting, so goldens
//! diff cleanly.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Str(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

/// 12-significant-digit scientific formatting.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    format!("{:.11e}", x)
}

fn cell_to_json(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Num(v) => format_number(*v),
        Cell::Bool(v) => v.to_string(),
        Cell::Str(s) => json_quote(s),
    }
}

fn cell_to_csv(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Num(v) => format_number(*v),
        Cell::Bool(v) => v.to_string(),
        Cell::Str(s) => {
            if s.contains(',') || s.contains('"') || s.contains('\n') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

fn json_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Rows plus metadata (tool version and the tolerances each numeric cell
/// was asserted under).
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<BTreeMap<String, Cell>>,
    pub metadata: BTreeMap<String, Cell>,
    /// Explicit CSV column order; sorted keys when empty.
    pub column_order: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert(
            "tool_version".to_string(),
            Cell::Str(env!("CARGO_PKG_VERSION").to_string()),
        );
        Report {
            rows: Vec::new(),
            metadata,
            column_order: Vec::new(),
        }
    }

    pub fn set_column_order(&mut self, columns: &[&str]) -> &mut Self {
        self.column_order = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn tolerance(&mut self, name: &str, value: f64) -> &mut Self {
        self.metadata
            .insert(format!("tolerance_{name}"), Cell::Num(value));
        self
    }

    pub fn push_row(&mut self, cells: Vec<(&str, Cell)>) -> &mut Self {
        let mut row = BTreeMap::new();
        for (k, v) in cells {
            row.insert(k.to_string(), v);
        }
        self.rows.push(row);
        self
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        out.push_str("\"metadata\":{");
        let parts: Vec<String> = self
            .metadata
            .iter()
            .map(|(k, v)| format!("{}:{}", json_quote(k), cell_to_json(v)))
            .collect();
        out.push_str(&parts.join(","));
        out.push_str("},\"rows\":[");
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                let parts: Vec<String> = row
                    .iter()
                    .map(|(k, v)| format!("{}:{}", json_quote(k), cell_to_json(v)))
                    .collect();
                format!("{{{}}}", parts.join(","))
            })
            .collect();
        out.push_str(&rows.join(","));
        out.push_str("]}\n");
        out
    }

    pub fn to_csv(&self) -> String {
        let mut columns: Vec<String> = self.column_order.clone();
        for row in &self.rows {
            for k in row.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
        if self.column_order.is_empty() {
            columns.sort();
        }
        let mut out = columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = columns
                .iter()
                .map(|c| row.get(c).map(cell_to_csv).unwrap_or_default())
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_json_shape() {
        let r = Report::new();
        let j = r.to_json();
        assert!(j.starts_with("{\"metadata\":{"));
        assert!(j.contains("\"rows\":[]"));
        assert!(j.ends_with("}\n"));
        let parsed: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert!(parsed["rows"].as_array().unwrap().is_empty());
    }

    #[test]
    fn csv_single_row() {
        let mut r = Report::new();
        r.push_row(vec![
            ("geodesic", Cell::Str("0,1".into())),
            ("alpha_bar", Cell::Num(0.2122)),
            ("verdict", Cell::Bool(true)),
        ]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines.len(), 3); // header, row, trailing newline
        assert_eq!(lines[0], "alpha_bar,geodesic,verdict");
        assert!(lines[1].starts_with("2.12200000000e-1,\"0,1\",true"));
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn serialization_deterministic() {
        let mut r = Report::new();
        r.meta("b_key", 1.0_f64);
        r.meta("a_key", "x");
        r.push_row(vec![("z", Cell::Int(1)), ("a", Cell::Num(2.0))]);
        assert_eq!(r.to_json(), r.to_json());
        assert_eq!(r.to_csv(), r.to_csv());
        // sorted keys in json
        let j = r.to_json();
        assert!(j.find("a_key").unwrap() < j.find("b_key").unwrap());
        assert!(j.find("\"a\"").unwrap() < j.find("\"z\"").unwrap());
    }

    #[test]
    fn number_format_12_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(format_number(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_number(-12345.678), "-1.23456780000e4");
        assert_eq!(format_number(0.0), "0.00000000000e0");
        let v: serde_json::Value =
            serde_json::from_str(&format!("[{}]", format_number(0.1))).unwrap();
        assert!((v[0].as_f64().unwrap() - 0.1).abs() < 1e-12);
    }
}
