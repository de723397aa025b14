//! Table encodings and atomic file writes.

use std::io::Write;
use std::path::Path;

use morreycex_core::export::Table;
use serde_json::{Map, Number, Value};
use tempfile::NamedTempFile;

use crate::config::Format;
use crate::error::CliError;

/// CSV cells become JSON booleans, numbers (all 17 digits kept) or strings.
pub fn cell_value(s: &str) -> Value {
    match s {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    if s.parse::<f64>().is_ok_and(f64::is_finite) {
        if let Ok(n) = s.parse::<Number>() {
            return Value::Number(n);
        }
    }
    Value::String(s.to_string())
}

/// `{"columns": [...], "rows": [{column: value}]}`.
pub fn table_json(t: &Table) -> Value {
    let rows = t
        .rows
        .iter()
        .map(|row| {
            let m: Map<String, Value> = t.header.iter().cloned().zip(row.iter().map(|c| cell_value(c))).collect();
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("columns".into(), Value::Array(t.header.iter().cloned().map(Value::String).collect()));
    m.insert("rows".into(), Value::Array(rows));
    Value::Object(m)
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// `(file name, contents)` for a table in the configured format.
pub fn encode_table(stem: &str, t: &Table, format: Format) -> (String, String) {
    let body = match format {
        Format::Csv => t.to_csv(),
        Format::Json => to_pretty(&table_json(t)),
    };
    (format!("{stem}.{}", format.extension()), body)
}

/// Writes each file through a temporary file in `dir` and a rename.
pub fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for (name, body) in files {
        let target = dir.join(name);
        let mut tmp = NamedTempFile::new_in(dir).map_err(io(dir))?;
        tmp.write_all(body.as_bytes()).map_err(io(&target))?;
        tmp.as_file().sync_all().map_err(io(&target))?;
        tmp.persist(&target).map_err(|e| CliError::Io {
            path: target.clone(),
            source: e.error,
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_keep_their_digits() {
        assert_eq!(cell_value("5.0000000000000000e-1").to_string(), "5.0000000000000000e-1");
        // serde_json writes a sign on nonnegative exponents; the digits are kept.
        assert_eq!(cell_value("3.0000000000000000e0").to_string(), "3.0000000000000000e+0");
        assert_eq!(cell_value("30"), Value::Number(30.into()));
        assert_eq!(cell_value("true"), Value::Bool(true));
        assert_eq!(cell_value("blow-up"), Value::String("blow-up".into()));
        assert_eq!(cell_value("NaN"), Value::String("NaN".into()));
    }

    #[test]
    fn json_rows_mirror_csv() {
        let mut t = Table::new(["n", "verdict"]);
        t.push(vec!["3".into(), "bounded".into()]);
        let v = table_json(&t);
        assert_eq!(v["columns"][1], "verdict");
        assert_eq!(v["rows"][0]["verdict"], "bounded");
    }

    #[test]
    fn writes_replace_existing_files() {
        let dir = tempfile::tempdir().unwrap();
        write_outputs(dir.path(), &[("a.csv".into(), "x\n".into())]).unwrap();
        write_outputs(dir.path(), &[("a.csv".into(), "y\n".into())]).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "y\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
