use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every non-integer number in `v`.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// A report: result fields plus the command, the resolved configuration and a timestamp.
/// Result floats are rounded on output; the configuration is echoed exactly.
pub struct Report {
    pub json: Map<String, Value>,
    /// Rows for CSV output; `None` means a single row built from the scalar JSON fields.
    pub csv: Option<(Vec<String>, Vec<Vec<Value>>)>,
}

impl Report {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        let mut json = Map::new();
        json.insert("command".into(), Value::from(command));
        json.insert("config".into(), serde_json::to_value(config)?);
        json.insert(
            "generated_at".into(),
            Value::from(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        );
        Ok(Self { json, csv: None })
    }

    pub fn insert(&mut self, key: &str, v: impl Serialize) -> Result<()> {
        self.json.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }

    /// Merges the fields of a serializable struct into the top level.
    pub fn extend(&mut self, v: impl Serialize) -> Result<()> {
        match serde_json::to_value(v)? {
            Value::Object(m) => self.json.extend(m),
            other => anyhow::bail!("expected an object, got {other}"),
        }
        Ok(())
    }

    /// CSV rows from serializable records; the header is the first record's keys.
    pub fn set_rows<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        let mut header = Vec::new();
        let mut out = Vec::new();
        for r in rows {
            let Value::Object(m) = serde_json::to_value(r)? else {
                anyhow::bail!("CSV rows must be objects");
            };
            if header.is_empty() {
                header = m.keys().cloned().collect();
            }
            out.push(
                header
                    .iter()
                    .map(|k| m.get(k).cloned().unwrap_or(Value::Null))
                    .collect(),
            );
        }
        self.csv = Some((header, out));
        Ok(())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut m = self.json.clone();
                for (k, v) in m.iter_mut() {
                    if k != "config" {
                        round_value(v);
                    }
                }
                Ok(serde_json::to_string_pretty(&Value::Object(m))? + "\n")
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> Result<String> {
        let (header, rows) = match &self.csv {
            Some((h, r)) => (h.clone(), r.clone()),
            None => {
                let scalars: Vec<(&String, &Value)> = self
                    .json
                    .iter()
                    .filter(|(k, v)| k.as_str() != "config" && !v.is_object() && !v.is_array())
                    .collect();
                (
                    scalars.iter().map(|(k, _)| (*k).clone()).collect(),
                    vec![scalars.iter().map(|(_, v)| (*v).clone()).collect()],
                )
            }
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for row in rows {
            w.write_record(row.into_iter().map(|mut v| {
                round_value(&mut v);
                match v {
                    Value::String(s) => s,
                    Value::Null => String::new(),
                    other => other.to_string(),
                }
            }))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(5.0 / 3.0), 1.66666666667);
        assert_eq!(round_sig(2.0), 2.0);
        assert_eq!(round_sig(-1.234567890123456e-7), -1.23456789012e-7);
        let mut v = serde_json::json!({"a": [0.1 + 0.2, 3], "b": {"c": 2.0 / 7.0}});
        round_value(&mut v);
        assert_eq!(v["a"][0], 0.3);
        assert_eq!(v["a"][1], 3);
        assert_eq!(v["b"]["c"], 0.285714285714);
    }

    #[test]
    fn csv_has_header_and_rows() {
        #[derive(Serialize)]
        struct Row {
            alpha: f64,
            rate: f64,
        }
        let mut r = Report::new("x", &()).unwrap();
        r.set_rows(&[
            Row {
                alpha: 0.0,
                rate: 1.5,
            },
            Row {
                alpha: 0.5,
                rate: 1.0 / 3.0,
            },
        ])
        .unwrap();
        let text = r.render(Format::Csv).unwrap();
        assert_eq!(text, "alpha,rate\n0.0,1.5\n0.5,0.333333333333\n");
    }

    #[test]
    fn scalar_csv_skips_nested_fields() {
        let mut r = Report::new("bounds", &()).unwrap();
        r.insert("L", 33).unwrap();
        r.insert("nested", serde_json::json!({"a": 1})).unwrap();
        let text = r.render(Format::Csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "command,generated_at,L");
        let row = lines.next().unwrap();
        assert!(row.starts_with("bounds,") && row.ends_with(",33"));
    }
}
