//! Single-writer output: CSV tables and versioned JSON documents.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{runtime, CliError};

pub const SCHEMA: &str = "wallach-flow/1";

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| runtime(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Float with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
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

    pub fn write(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(runtime)?;
        for r in &self.rows {
            w.write_record(r).map_err(runtime)?;
        }
        w.flush().map_err(runtime)
    }
}

/// Writes `{"schema": ..., "command": ..., <payload fields>}`.
pub fn write_json<T: Serialize>(out: &mut dyn Write, command: &str, payload: &T) -> Result<(), CliError> {
    let mut doc = Map::new();
    doc.insert("schema".into(), Value::from(SCHEMA));
    doc.insert("command".into(), Value::from(command));
    match serde_json::to_value(payload).map_err(runtime)? {
        Value::Object(m) => doc.extend(m),
        other => {
            doc.insert("data".into(), other);
        }
    }
    serde_json::to_writer_pretty(&mut *out, &Value::Object(doc)).map_err(runtime)?;
    writeln!(out).map_err(runtime)?;
    out.flush().map_err(runtime)
}
