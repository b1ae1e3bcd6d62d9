use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("KLAB_GIT_DESCRIBE"), ")");

/// Rows with a fixed column order; written header-first even when empty.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a subcommand hands back: a JSON summary, CSV rows, and any
/// hypothesis or check violations (exit code 2 when non-empty).
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: Value,
    pub table: Table,
    pub violations: Vec<String>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a Value,
    violations: &'a [String],
    results: &'a Value,
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_csv(table: &Table, w: Box<dyn Write>) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(&table.header)?;
    for row in &table.rows {
        wr.write_record(row)?;
    }
    wr.flush()?;
    Ok(())
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// JSON goes to `out` as one envelope. CSV goes to `out` with the envelope
/// beside it in `<out>.meta.json`, or on stderr when writing to stdout.
pub fn emit(command: &str, config: &Value, outcome: &Outcome, format: Format, out: Option<&Path>) -> Result<()> {
    let env = Envelope {
        tool: "klab",
        version: VERSION,
        command,
        config,
        violations: &outcome.violations,
        results: &outcome.summary,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    match format {
        Format::Json => {
            let mut w = sink(out)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        Format::Csv => {
            write_csv(&outcome.table, sink(out)?)?;
            match out {
                Some(p) => std::fs::write(meta_path(p), text)?,
                None => eprint!("{text}"),
            }
        }
    }
    Ok(())
}
