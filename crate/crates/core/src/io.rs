//! Table output: CSV with a header row, or JSON as an array of row objects.
//! Floats are printed with 17 significant digits in scientific form so that
//! identical runs give byte-identical output.

use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Fixed float format: 17 significant digits, scientific.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Copy)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = crate::SalError;

    fn from_str(s: &str) -> crate::Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(crate::SalError::Parse(format!("unknown format '{s}' (csv|json)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in &self.rows {
            let fields: Vec<String> = r
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => fmt_f64(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Text(t) => csv_field(t),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Non-finite numbers become the strings "nan", "inf", "-inf".
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (name, c)) in self.columns.iter().zip(r).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let v = match c {
                    Cell::Num(x) if x.is_finite() => fmt_f64(*x),
                    Cell::Num(x) => serde_json::Value::String(fmt_f64(*x)).to_string(),
                    Cell::Int(k) => k.to_string(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Text(t) => serde_json::Value::String(t.clone()).to_string(),
                    Cell::Empty => "null".into(),
                };
                let _ = write!(out, "{}: {v}", serde_json::Value::String(name.clone()));
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["t", "value", "converged", "note"]);
        t.push(vec![0.5.into(), (1.0 / 3.0).into(), true.into(), "a,b".into()]);
        t.push(vec![1.0.into(), f64::INFINITY.into(), false.into(), Cell::Empty]);
        t
    }

    #[test]
    fn csv_layout() {
        let s = sample().to_csv();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,value,converged,note");
        assert_eq!(lines[1], "5.0000000000000000e-1,3.3333333333333331e-1,true,\"a,b\"");
        assert_eq!(lines[2], "1.0000000000000000e0,inf,false,");
    }

    #[test]
    fn json_parses_back() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["value"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(rows[1]["value"], "inf");
        assert!(rows[1]["note"].is_null());
        assert_eq!(Table::new(&["x"]).to_json(), "[]\n");
    }

    #[test]
    fn round_trip_exact() {
        for x in [0.1, 1e-300, 123456789.123456789, -2.5e17, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
