//! Tabular output as CSV or JSON.
//!
//! CSV cells use 12 significant digits with a decimal point and no locale
//! formatting; JSON numbers keep full precision so that a parse reproduces
//! them bit for bit. Infinite values are written as the string `INF` in
//! both formats.

use serde_json::{Map, Number, Value};

/// Sentinel for `+∞` in serialized output.
pub const INF: &str = "INF";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_infinite() && *x > 0.0 => Value::String(INF.into()),
            Cell::Num(x) if x.is_infinite() => Value::String(format!("-{INF}")),
            Cell::Num(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::Number((*n).into()),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Column-named rows plus the command and parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub params: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            params: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: impl Into<Cell>) {
        self.params.push((name.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn emit(table: &Table, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    }
}

pub fn to_csv(table: &Table) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("write to memory");
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv)).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

pub fn to_json(table: &Table) -> Vec<u8> {
    let params: Map<String, Value> = table.params.iter().map(|(k, v)| (k.clone(), v.json())).collect();
    let mut meta = Map::new();
    meta.insert("command".into(), Value::String(table.command.clone()));
    meta.insert("params".into(), Value::Object(params));
    let data: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            Value::Object(
                table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect(),
            )
        })
        .collect();
    let mut root = Map::new();
    root.insert("meta".into(), Value::Object(meta));
    root.insert("data".into(), Value::Array(data));
    let mut out = serde_json::to_vec_pretty(&Value::Object(root)).expect("serializable");
    out.push(b'\n');
    out
}

/// 12 significant digits, trailing zeros kept; exponent form outside
/// `[1e-5, 1e12)`.
pub fn fmt_num(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { INF.into() } else { format!("-{INF}") };
    }
    if x == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        format!("{:.*}", (DIGITS - 1 - exp) as usize, x)
    } else {
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("sweep", vec!["eta".into(), "pure-loss".into()]);
        t.param("nbar", 0.1);
        t.push(vec![0.5.into(), 1.0.into()]);
        t.push(vec![1.0.into(), f64::INFINITY.into()]);
        t
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0), "1.00000000000");
        assert_eq!(fmt_num(0.0), "0.00000000000");
        assert_eq!(fmt_num(-0.0), "0.00000000000");
        assert_eq!(fmt_num(1.026_426_7), "1.02642670000");
        assert_eq!(fmt_num(123_456.789), "123456.789000");
        assert_eq!(fmt_num(9.999_999_999_999_9), "10.0000000000");
        assert_eq!(fmt_num(1.5e-7), "1.50000000000e-07");
        assert_eq!(fmt_num(-2.5e13), "-2.50000000000e+13");
        assert_eq!(fmt_num(f64::INFINITY), "INF");
    }

    #[test]
    fn csv_layout() {
        let out = String::from_utf8(to_csv(&sample())).unwrap();
        assert_eq!(out, "eta,pure-loss\n0.500000000000,1.00000000000\n1.00000000000,INF\n");
        let empty = Table::new("sweep", vec!["eta".into(), "x".into()]);
        assert_eq!(to_csv(&empty), b"eta,x\n");
        let mut quoted = Table::new("bound", vec!["channel".into()]);
        quoted.push(vec!["pauli(p0=0.7, p1=0.1)".into()]);
        assert!(String::from_utf8(to_csv(&quoted))
            .unwrap()
            .contains("\"pauli(p0=0.7, p1=0.1)\""));
    }

    #[test]
    fn json_layout_and_round_trip() {
        let mut t = sample();
        let awkward = [0.1 + 0.2, 1.0 / 3.0, 2.2250738585072014e-308, 1.7976931348623157e308];
        for x in awkward {
            t.push(vec![x.into(), (-x).into()]);
        }
        let v: Value = serde_json::from_slice(&to_json(&t)).unwrap();
        assert_eq!(v["meta"]["command"], "sweep");
        assert_eq!(v["meta"]["params"]["nbar"].as_f64(), Some(0.1));
        assert_eq!(v["data"][1]["pure-loss"], INF);
        for (k, x) in awkward.iter().enumerate() {
            let row = &v["data"][k + 2];
            assert_eq!(row["eta"].as_f64().unwrap().to_bits(), x.to_bits());
            assert_eq!(row["pure-loss"].as_f64().unwrap().to_bits(), (-x).to_bits());
        }
    }
}
