use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Twelve significant digits; integers and infinities stay readable.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    format!("{x:.11e}")
}

/// Collects CSV text behind a `# phonon-qram <version> <params>` line.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<P: Serialize>(params: &P, header: &[&str]) -> Self {
        let params = serde_json::to_string(params).expect("parameters serialize");
        let mut text = format!("# phonon-qram {VERSION} {params}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn write(&self, dir: &Path, name: &str) -> CliResult<PathBuf> {
        write_file(dir, name, &self.text)
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    write_file(dir, name, &text)
}

/// JSON envelope shared by every JSON artifact.
pub fn meta<P: Serialize>(params: &P) -> serde_json::Value {
    serde_json::json!({ "tool": "phonon-qram", "version": VERSION, "params": params })
}
