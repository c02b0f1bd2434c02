//! CSV and JSON writers. Numbers use 17 significant digits; unreached nodes
//! are written as `inf`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::is_inf;

pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if is_inf(v) || v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_at(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_at(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

/// Header line plus rows of already formatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}

/// A field stored x-major (`i·ny + j`), one CSV row per line `j` (fixed `y`).
pub fn write_matrix(path: &Path, values: &[f64], nx: usize, ny: usize) -> Result<()> {
    let mut text = String::with_capacity(values.len() * 24);
    for j in 0..ny {
        for i in 0..nx {
            if i > 0 {
                text.push(',');
            }
            let _ = write!(text, "{}", num(values[i * ny + j]));
        }
        text.push('\n');
    }
    write_text(path, &text)
}
