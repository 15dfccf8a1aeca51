//! Plain CSV and JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{io, CliError};

/// Locale-independent number formatting: plain decimals in the usual range,
/// exponent notation for very small or very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A CSV writer with a `#` comment block and a header row. Lines end in LF.
pub struct Csv<W: Write> {
    out: W,
}

impl<W: Write> Csv<W> {
    pub fn new(mut out: W, comments: &[String], header: &[&str]) -> io::Result<Self> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", header.join(","))?;
        Ok(Csv { out })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// Opens `path` for writing, or stdout when `path` is `None`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(io(p))?))),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut out = sink(path)?;
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    let target = path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| "<stdout>".into());
    writeln!(out, "{text}")
        .and_then(|_| out.flush())
        .map_err(io(target))
}
