//! Report container and its CSV / JSON serializations.

use crate::{CliError, Common, Format};
use serde_json::{json, Map, Value};
use std::fs;
use std::path::PathBuf;

pub const SCHEMA: &str = "sascomp/v1";

/// What a subcommand produced: a verdict, a free-form summary and one
/// table (the CSV payload).
pub struct Report {
    pub command: &'static str,
    pub passed: bool,
    pub summary: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// extra files (name, contents) written next to the main artifact
    pub attachments: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            passed: true,
            summary: Value::Null,
            columns,
            rows: Vec::new(),
            attachments: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    fn rows_as_objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect();
                Value::Object(obj)
            })
            .collect()
    }

    pub fn to_json(&self, config: &Common) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "config": config,
            "passed": self.passed,
            "summary": self.summary,
            "columns": self.columns,
            "rows": self.rows_as_objects(),
        })
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| CliError::Failed(e.to_string()))?;
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            w.write_record(&cells).map_err(|e| CliError::Failed(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Failed(e.to_string()))
    }
}

/// Writes `<out>/<command>.<ext>` plus attachments; returns the main path.
pub fn write(report: &Report, config: &Common) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&config.out)?;
    let path = match config.format {
        Format::Json => {
            let p = config.out.join(format!("{}.json", report.command));
            let text = serde_json::to_string_pretty(&report.to_json(config)).map_err(|e| CliError::Failed(e.to_string()))?;
            fs::write(&p, text + "\n")?;
            p
        }
        Format::Csv => {
            let p = config.out.join(format!("{}.csv", report.command));
            fs::write(&p, report.to_csv()?)?;
            p
        }
    };
    for (name, body) in &report.attachments {
        fs::write(config.out.join(name), body)?;
    }
    Ok(path)
}
