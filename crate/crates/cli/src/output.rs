//! Tables and their JSON / CSV renderings.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        Table { command: command.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{{\"command\": {}, \"records\": [", json_string(&self.command));
        for (k, row) in self.rows.iter().enumerate() {
            out.push_str(if k == 0 { "\n  {" } else { ",\n  {" });
            for (j, (col, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: {}", json_string(col), json_cell(cell));
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]}\n" } else { "\n]}\n" });
        out
    }

    fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 15 significant digits: positional notation for moderate exponents,
/// scientific otherwise. Non-finite values become `inf`, `-inf`, `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let sci = format!("{x:.14e}");
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        sci
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) if v.is_finite() => format_number(*v),
        Cell::Num(v) => json_string(&format_number(*v)),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => json_string(s),
        Cell::Bool(b) => b.to_string(),
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_number(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(format_number(0.1157), "0.115700000000000");
        assert_eq!(format_number(-0.0), "0.00000000000000");
        assert_eq!(format_number(2.0), "2.00000000000000");
        assert_eq!(format_number(1e20), "1.00000000000000e20");
        assert_eq!(format_number(1.5e-7), "1.50000000000000e-7");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn renderings() {
        let mut t = Table::new("demo", &["x", "label", "ok"]);
        t.push(vec![1.0.into(), "a,b".into(), true.into()]);
        t.push(vec![f64::INFINITY.into(), "c".into(), false.into()]);
        assert_eq!(t.render(Format::Csv), "x,label,ok\n1.00000000000000,\"a,b\",true\ninf,c,false\n");
        let json = t.render(Format::Json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["records"][1]["x"], "inf");
        assert_eq!(v["records"][0]["label"], "a,b");
    }
}
