//! Locale-free number formatting, CSV tables and report envelopes.

use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// C's `%.17g`: 17 significant digits, trailing zeros stripped, exponent
/// form outside `[1e-4, 1e17)`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = strip_zeros(mant.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

/// A flat table of numeric columns.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn with_header(cols: &[&str]) -> Self {
        Self { header: Some(cols.iter().map(|s| s.to_string()).collect()), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        if let Some(h) = &self.header {
            w.write_record(h).map_err(io)?;
        }
        for r in &self.rows {
            w.write_record(r.iter().map(|v| fmt_g17(*v))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("ascii output"))
    }
}

/// Report object: result fields at the top level next to the effective
/// configuration, constant provenance and tool version.
pub fn envelope<T: Serialize>(result: &T, config: &Value, provenance: Option<Value>) -> Result<Value> {
    let mut obj = match serde_json::to_value(result).map_err(|e| Error::InvalidParameter(format!("serialisation: {e}")))? {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("config".into(), config.clone());
    obj.insert("provenance".into(), provenance.unwrap_or_else(|| serde_json::json!({"kind": "none"})));
    obj.insert("tool".into(), Value::String(env!("CARGO_PKG_NAME").into()));
    obj.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    Ok(Value::Object(obj))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable value");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c() {
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(9.0), "9");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(2.5e-7), "2.4999999999999999e-07");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(-1234.5), "-1234.5");
        assert_eq!(fmt_g17(123456789012345678.0), "1.2345678901234568e+17");
        assert_eq!(fmt_g17(0.0001), "0.0001");
    }

    #[test]
    fn csv_rows() {
        let t = Table { header: None, rows: vec![vec![1.0, 3.0, 5.0]] };
        assert_eq!(t.to_csv().unwrap(), "1,3,5\r\n");
    }
}
