//! Tables of results rendered as aligned text, JSON lines or CSV.
//!
//! Every cell holds the full-precision value; text rendering only shortens numbers for display.

use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Result of one command: tables for stdout, warnings for stderr.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::JsonLines => self.render_json_lines(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for (k, t) in self.tables.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            out.push_str(&format!("[{}]\n", t.name));
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(display).collect()).collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|j| {
                    cells
                        .iter()
                        .map(|r| r[j].chars().count())
                        .chain([t.columns[j].chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |items: &[String]| {
                let padded: Vec<String> = items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                    .collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            out.push_str(&line(&t.columns));
            for r in &cells {
                out.push_str(&line(r));
            }
        }
        out
    }

    fn render_json_lines(&self) -> String {
        let mut out = String::new();
        for t in &self.tables {
            for r in &t.rows {
                let mut obj = Map::new();
                obj.insert("table".into(), Value::String(t.name.clone()));
                for (c, v) in t.columns.iter().zip(r) {
                    obj.insert(c.clone(), v.clone());
                }
                out.push_str(&Value::Object(obj).to_string());
                out.push('\n');
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        for t in &self.tables {
            let header = std::iter::once("table".to_string()).chain(t.columns.iter().cloned());
            w.write_record(header).expect("in-memory write");
            for r in &t.rows {
                let fields = std::iter::once(t.name.clone()).chain(r.iter().map(raw));
                w.write_record(fields).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

/// Exact text of a cell for CSV.
fn raw(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Shortened text of a cell for the aligned table.
fn display(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let a = x.abs();
            if x == x.trunc() && a < 1e12 {
                format!("{x:.0}")
            } else if (1e-4..1e7).contains(&a) {
                let s = format!("{x:.8}");
                s.trim_end_matches('0').trim_end_matches('.').to_string()
            } else {
                format!("{x:.6e}")
            }
        }
        Value::Null => "-".into(),
        other => raw(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        let mut t = Table::new("t", &["name", "value"]);
        t.push(vec![json!("c₁"), num(1501.253_512_345)]);
        t.push(vec![json!("rate, δh"), num(4.0 / 315.0)]);
        Report {
            tables: vec![t],
            warnings: vec![],
        }
    }

    #[test]
    fn text_is_aligned() {
        let text = sample().render(Format::Text);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "[t]");
        let col = |line: &str, pat: &str| line.find(pat).map(|b| line[..b].chars().count());
        assert_eq!(col(lines[2], "1501"), col(lines[1], "value"));
        assert!(text.contains("0.01269841"));
    }

    #[test]
    fn machine_rows_keep_full_precision() {
        let jl = sample().render(Format::JsonLines);
        let first: Value = serde_json::from_str(jl.lines().next().unwrap()).unwrap();
        assert_eq!(first["value"].as_f64(), Some(1501.253_512_345));
        assert_eq!(first["table"], "t");
        let csv = sample().render(Format::Csv);
        assert!(csv.contains("\"rate, δh\""));
        assert!(csv.contains(&(4.0f64 / 315.0).to_string()));
    }
}
