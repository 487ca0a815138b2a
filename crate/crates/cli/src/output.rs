//! Run results and their CSV/JSON artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

/// Columnar series; the first column is always `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        assert_eq!(columns.first().map(String::as_str), Some("t"));
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// JSON number, or a string for values JSON cannot hold.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(format_float(v))
    }
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

/// Column names `q[0][0], q[0][1], …` for an `r × c` matrix.
pub fn matrix_columns(q: &str, r: usize, c: usize) -> Vec<String> {
    (0..r).flat_map(|i| (0..c).map(move |j| format!("{q}[{i}][{j}]"))).collect()
}

pub fn vector_columns(q: &str, len: usize) -> Vec<String> {
    (0..len).map(|i| format!("{q}[{i}]")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub command: String,
    pub scalars: BTreeMap<String, Value>,
    pub series: Table,
    pub diagnostics: Vec<String>,
}

impl RunResult {
    pub fn new(command: &str, series: Table) -> Self {
        RunResult { command: command.into(), scalars: BTreeMap::new(), series, diagnostics: Vec::new() }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.scalars.insert(key.into(), v.into());
    }

    pub fn set_num(&mut self, key: &str, v: f64) {
        self.scalars.insert(key.into(), num(v));
    }

    pub fn to_json(&self, config_hash: &str) -> String {
        let doc = json!({
            "command": self.command,
            "config_sha256": config_hash,
            "scalars": self.scalars,
            "diagnostics": self.diagnostics,
            "series": { "file": format!("{}.csv", self.command), "columns": self.series.columns, "rows": self.series.rows.len() },
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json");
        s.push('\n');
        s
    }
}

/// Writes all files through temporaries in `dir`, renaming only after every write succeeded.
pub fn write_atomically(dir: &Path, files: &[(String, String)]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::new();
    let result = (|| {
        for (name, content) in files {
            let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
            let mut f = fs::File::create(&tmp)?;
            staged.push(tmp.clone());
            f.write_all(content.as_bytes())?;
            f.sync_all()?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        for tmp in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    let mut out = Vec::new();
    for ((name, _), tmp) in files.iter().zip(&staged) {
        let dest = dir.join(name);
        fs::rename(tmp, &dest)?;
        out.push(dest);
    }
    Ok(out)
}
