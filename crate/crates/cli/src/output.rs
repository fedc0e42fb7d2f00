//! Deterministic table and summary output. Floating-point values are
//! rendered with the shortest round-trip representation so identical runs
//! produce byte-identical files, and CSV fields are quoted only when they
//! contain delimiters.

use std::fmt::Write as _;
use std::path::Path;

use crate::Failure;

/// A comma-separated table with a header row, built in memory so it can be
/// written atomically to a file or to standard output.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = String::new();
        push_row(&mut text, columns.iter().map(|c| c.to_string()));
        Table { text }
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        push_row(&mut self.text, fields);
    }

    pub fn write(&self, out: Option<&Path>) -> Result<(), Failure> {
        match out {
            Some(path) => std::fs::write(path, self.text.as_bytes()).map_err(|e| {
                Failure::Numerical(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                write_stdout(&self.text);
                Ok(())
            }
        }
    }
}

fn push_row(text: &mut String, fields: impl IntoIterator<Item = String>) {
    let mut first = true;
    for field in fields {
        if !first {
            text.push(',');
        }
        first = false;
        text.push_str(&escape(&field));
    }
    text.push('\n');
}

/// Quotes a field if it contains a comma, a quote, or a newline.
fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        let mut quoted = String::with_capacity(field.len() + 2);
        quoted.push('"');
        for ch in field.chars() {
            if ch == '"' {
                quoted.push('"');
            }
            quoted.push(ch);
        }
        quoted.push('"');
        quoted
    } else {
        field.to_string()
    }
}

/// Shortest round-trip rendering of a float; deterministic for a given bit
/// pattern.
pub fn fmt_f64(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x}").unwrap();
    s
}

/// Natural log for the summary columns; `None` when the value is not a
/// positive finite number, serialized as null.
pub fn log_value(x: f64) -> Option<f64> {
    let l = x.ln();
    l.is_finite().then_some(l)
}

/// Writes to standard output, ignoring a pipe closed by the reader so the
/// process still exits with its real status code.
fn write_stdout(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// Prints the JSON summary object on standard output, after a separating
/// blank line when the table also went to standard output.
pub fn print_summary<T: serde::Serialize>(summary: &T, table_on_stdout: bool) {
    let json =
        serde_json::to_string_pretty(summary).expect("summary serialization cannot fail");
    let mut text = String::with_capacity(json.len() + 2);
    if table_on_stdout {
        text.push('\n');
    }
    text.push_str(&json);
    text.push('\n');
    write_stdout(&text);
}
