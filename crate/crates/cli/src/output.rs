//! Output plumbing: CSV/JSON emission with deterministic formatting.
//!
//! Floats are printed with Rust's shortest round-trip formatting, so a
//! reparse recovers the exact f64 bit pattern.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A single named table (CSV) or JSON document.
pub struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Sink { out }
    }

    pub fn write_all(&self, content: &str) -> io::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, content),
            None => {
                io::stdout().write_all(content.as_bytes())?;
                Ok(())
            }
        }
    }

    /// Write one of several named files: under `--out` the name is joined
    /// onto the path (treated as a directory); on stdout the sections are
    /// separated by `# file: <name>` marker lines.
    pub fn write_named(&self, name: &str, content: &str) -> io::Result<()> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(Path::new(dir).join(name), content)
            }
            None => {
                let mut stdout = io::stdout().lock();
                writeln!(stdout, "# file: {name}")?;
                stdout.write_all(content.as_bytes())?;
                Ok(())
            }
        }
    }
}

/// Render a CSV table with LF newlines and a header row.
pub fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn json_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}
