//! Report rendering: every command's output in CSV or JSON form.
//!
//! Both formats are built from the same pre-stringified values, so the
//! numeric payload of a command is identical across formats — only the
//! framing differs. Counts that can exceed machine integers are rendered as
//! decimal strings; exact rationals as `p/q`. Rendering is deterministic:
//! the same command with the same flags produces the same bytes.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};

use crate::CliError;

/// Output encoding selected by `--format`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A labeled grid of values swept over one integer parameter.
///
/// CSV form: a header `row,<c1>,<c2>,...` followed by one line per row.
/// JSON form: `{"table","sweep","columns","rows":[{"label","values"}]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepTable {
    /// Identifier echoed into the output (table id or command name).
    pub title: String,
    /// Name of the swept parameter, e.g. `d1`.
    pub sweep: String,
    /// Swept values, one per column.
    pub columns: Vec<usize>,
    /// Labeled value rows; every row has one value per column.
    pub rows: Vec<SweepRow>,
}

/// One labeled row of a [`SweepTable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub label: String,
    pub values: Vec<String>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.columns {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.values.len(), self.columns.len());
            out.push_str(&row.label);
            for v in &row.values {
                out.push(',');
                out.push_str(v);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "table": self.title,
            "sweep": self.sweep,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| json!({
                "label": r.label,
                "values": r.values,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => pretty(self.to_json()),
        }
    }
}

/// Serializes a JSON value with stable 2-space indentation and a trailing
/// newline.
pub fn pretty(value: Value) -> String {
    let mut text = serde_json::to_string_pretty(&value).expect("report values serialize");
    text.push('\n');
    text
}

/// Flattens a JSON report into `key,value` CSV lines.
///
/// Nested objects join their path with `_`; arrays of scalars become one
/// line per `key_<index>`. This keeps the CSV payload numerically identical
/// to the JSON one without a second source of truth.
pub fn key_value_csv(value: &Value) -> String {
    let mut lines = Vec::new();
    flatten("", value, &mut lines);
    let mut out = String::new();
    for (key, rendered) in lines {
        out.push_str(&key);
        out.push(',');
        out.push_str(&rendered);
        out.push('\n');
    }
    out
}

fn flatten(prefix: &str, value: &Value, lines: &mut Vec<(String, String)>) {
    let key = |suffix: &str| {
        if prefix.is_empty() {
            suffix.to_string()
        } else {
            format!("{prefix}_{suffix}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, lines);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, lines);
            }
        }
        Value::Null => lines.push((prefix.to_string(), String::new())),
        Value::Bool(b) => lines.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => lines.push((prefix.to_string(), n.to_string())),
        Value::String(s) => lines.push((prefix.to_string(), s.clone())),
    }
}

/// Renders a key-value style report in the requested format.
pub fn render_report(value: Value, format: Format) -> String {
    match format {
        Format::Csv => key_value_csv(&value),
        Format::Json => pretty(value),
    }
}

/// Writes rendered output to `--out` or stdout.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> SweepTable {
        SweepTable {
            title: "T1".into(),
            sweep: "d1".into(),
            columns: vec![1, 2, 3],
            rows: vec![
                SweepRow { label: "exact".into(), values: vec!["4".into(), "15".into(), "40".into()] },
                SweepRow { label: "naive".into(), values: vec!["4".into(), "16".into(), "64".into()] },
            ],
        }
    }

    #[test]
    fn csv_has_one_header_and_one_line_per_row() {
        let csv = sample_table().to_csv();
        assert_eq!(csv, "row,1,2,3\nexact,4,15,40\nnaive,4,16,64\n");
    }

    #[test]
    fn json_and_csv_carry_the_same_values() {
        let table = sample_table();
        let json = table.to_json();
        let csv = table.to_csv();
        for row in json["rows"].as_array().unwrap() {
            for value in row["values"].as_array().unwrap() {
                assert!(csv.contains(value.as_str().unwrap()));
            }
        }
    }

    #[test]
    fn key_value_csv_flattens_nested_reports() {
        let value = json!({
            "lower": { "value": "32", "method": "multi-layer-lower" },
            "upper": null,
            "seeds": ["1", "2"],
            "matched": true,
        });
        let csv = key_value_csv(&value);
        assert!(csv.contains("lower_value,32\n"));
        assert!(csv.contains("lower_method,multi-layer-lower\n"));
        assert!(csv.contains("upper,\n"));
        assert!(csv.contains("seeds_0,1\n"));
        assert!(csv.contains("matched,true\n"));
    }

    #[test]
    fn rendering_is_byte_stable() {
        let table = sample_table();
        assert_eq!(table.render(Format::Json), table.render(Format::Json));
        assert_eq!(table.render(Format::Csv), table.render(Format::Csv));
        assert!(table.render(Format::Json).ends_with('\n'));
    }
}
