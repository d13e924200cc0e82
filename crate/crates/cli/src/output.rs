//! Fixed-format tables and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

/// C-style `%.12e`: twelve fractional digits and a signed, two-digit exponent.
pub fn sci(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Numeric table with optional trailing `name,value` records.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub footer: Vec<(String, Option<f64>)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| sci(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (name, value) in &self.footer {
            out.push_str(name);
            out.push(',');
            if let Some(v) = value {
                out.push_str(&sci(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, config: &RunConfig) -> Value {
        let footer: serde_json::Map<String, Value> =
            self.footer.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        json!({
            "config": config,
            "columns": self.columns,
            "rows": self.rows,
            "footer": footer,
        })
    }

    pub fn render(&self, config: &RunConfig) -> String {
        match config.format {
            Format::Csv => self.to_csv(),
            Format::Json => pretty(&self.to_json(config)),
        }
    }
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(contents.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source });
    };
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
