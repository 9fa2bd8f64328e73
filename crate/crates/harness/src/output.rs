//! CSV and metadata artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use adrx_core::SampleSeries;
use serde::Serialize;
use thiserror::Error;

use crate::config::ConfigFile;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("series {name} does not share the window grid of {first}")]
    GridMismatch { name: String, first: String },
    #[error("cannot serialize metadata: {0}")]
    Serialize(#[from] toml::ser::Error),
}

/// A column of the output table.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSeries {
    pub name: String,
    pub series: SampleSeries,
}

impl NamedSeries {
    pub fn new(name: impl Into<String>, series: SampleSeries) -> Self {
        Self {
            name: name.into(),
            series,
        }
    }
}

/// Fixed-point rendering with nine significant digits.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{:.8e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 8 {
        format!("{digits}{}", "0".repeat((exp - 8) as usize))
    } else if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    if v < 0.0 {
        format!("-{body}")
    } else {
        body
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `t_start,t_end,<names...>` and one row per window. `footer`, if
/// given, is appended as a final `#` comment line.
pub fn write_csv_with_footer(series: &[NamedSeries], path: &Path, footer: Option<&str>) -> Result<(), OutputError> {
    if let Some(first) = series.first() {
        for s in &series[1..] {
            if s.series.t_grid != first.series.t_grid || s.series.ts != first.series.ts {
                return Err(OutputError::GridMismatch {
                    name: s.name.clone(),
                    first: first.name.clone(),
                });
            }
        }
    }

    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    let mut header = String::from("t_start,t_end");
    for s in series {
        header.push(',');
        header.push_str(&s.name);
    }
    header.push('\n');
    out.write_all(header.as_bytes()).map_err(io_error(path))?;

    if let Some(first) = series.first() {
        let ts = first.series.ts;
        for (i, &start) in first.series.t_grid.iter().enumerate() {
            let mut row = format!("{start:.9},{:.9}", start + ts);
            for s in series {
                row.push(',');
                row.push_str(&format_value(s.series.values[i]));
            }
            row.push('\n');
            out.write_all(row.as_bytes()).map_err(io_error(path))?;
        }
    }
    if let Some(note) = footer {
        let line = format!("# FAILED: {}\n", note.replace(['\n', '\r'], " "));
        out.write_all(line.as_bytes()).map_err(io_error(path))?;
    }
    out.flush().map_err(io_error(path))
}

pub fn write_csv(series: &[NamedSeries], path: &Path) -> Result<(), OutputError> {
    write_csv_with_footer(series, path, None)
}

/// Contents of the `.meta` sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub version: String,
    pub seed: u64,
    pub threads: usize,
    pub runtime_seconds: f64,
    pub status: String,
    /// One line per compared series.
    pub summary: Vec<String>,
    pub config: ConfigFile,
}

pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

pub fn write_meta(meta: &RunMetadata, path: &Path) -> Result<(), OutputError> {
    let text = toml::to_string(meta)?;
    std::fs::write(path, text).map_err(io_error(path))
}
