//! Key/value run reports.
//!
//! Text form prints one `key: value` line per field. Structured form prints
//! one record per line as space-separated `key=value` pairs; values never
//! contain spaces.

use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Clone, Default)]
pub struct Record {
    fields: Vec<(&'static str, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, key: &'static str, value: impl ToString) -> Self {
        let value = value.to_string().replace(char::is_whitespace, "_");
        self.fields.push((key, value));
        self
    }
}

pub fn render(records: &[Record], format: ReportFormat) -> String {
    let mut out = String::new();
    for (i, record) in records.iter().enumerate() {
        match format {
            ReportFormat::Text => {
                if i > 0 {
                    out.push('\n');
                }
                for (k, v) in &record.fields {
                    let _ = writeln!(out, "{k}: {v}");
                }
            }
            ReportFormat::Structured => {
                let line: Vec<String> = record.fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
    }
    out
}
