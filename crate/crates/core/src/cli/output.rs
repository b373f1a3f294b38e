//! Report writers: JSON with sorted keys and RFC-4180 CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

/// Pretty JSON with keys in lexicographic order and a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    // serde_json's Value map is a BTreeMap, so a detour through Value sorts keys
    let value = serde_json::to_value(report).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::Numerical(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(dir: &Path, stem: &str, report: &T) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.json"));
    std::fs::write(&path, to_json(report)?).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

/// Numbers as written to CSV: floats in scientific notation with 17
/// significant digits, integers as is.
pub fn format_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut BTreeMap<String, String>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => {
            out.insert(prefix.to_string(), String::new());
        }
        Value::Bool(b) => {
            out.insert(prefix.to_string(), b.to_string());
        }
        Value::Number(n) => {
            out.insert(prefix.to_string(), format_number(n));
        }
        Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
    }
}

/// One CSV line per row; nested fields become dotted columns and the header
/// is the sorted union of all columns.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let flat = rows
        .iter()
        .map(|r| {
            let value = serde_json::to_value(r).map_err(|e| Error::Numerical(e.to_string()))?;
            let mut cells = BTreeMap::new();
            flatten("", &value, &mut cells);
            Ok(cells)
        })
        .collect::<Result<Vec<_>>>()?;
    let header: BTreeSet<&String> = flat.iter().flat_map(|c| c.keys()).collect();
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(vec![]);
    let csv_error = |e: csv::Error| Error::Numerical(e.to_string());
    writer.write_record(&header).map_err(csv_error)?;
    for cells in &flat {
        writer
            .write_record(header.iter().map(|k| cells.get(*k).map_or("", String::as_str)))
            .map_err(csv_error)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

pub fn write_csv<T: Serialize>(dir: &Path, stem: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.csv"));
    std::fs::write(&path, to_csv(rows)?).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct R {
            zeta: f64,
            alpha: u32,
        }
        let text = to_json(&R { zeta: 0.02, alpha: 3 }).unwrap();
        assert_eq!(text, "{\n  \"alpha\": 3,\n  \"zeta\": 0.02\n}\n");
    }

    #[test]
    fn csv_flattens_and_formats() {
        let rows = [
            json!({"b": 0.1, "a": {"x": 2, "y": [1.5, true]}, "c": null}),
            json!({"b": 1e-300, "a": {"x": 3, "y": [2.5, false]}, "d": "s,t"}),
        ];
        let text = to_csv(&rows).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "a.x,a.y.0,a.y.1,b,c,d");
        assert_eq!(lines[1], "2,1.5000000000000000e0,true,1.0000000000000001e-1,,");
        assert_eq!(lines[2], "3,2.5000000000000000e0,false,1.0000000000000000e-300,,\"s,t\"");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.62607015e-34, f64::MAX, 5e-324] {
            let s = format_number(&serde_json::Number::from_f64(x).unwrap());
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
