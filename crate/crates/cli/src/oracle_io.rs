//! Plain-text serialization of hyperplane arrangements.
//!
//! One hyperplane per line: the normal's coordinates followed by the offset,
//! whitespace-separated, each entry an integer `p` or a fraction `p/q`. The
//! ambient dimension is implicit — one less than the entries per line.
//! Blank lines and `#` comments are ignored on input and never produced on
//! output. The format exists for debugging and fixture replay: a sampled
//! arrangement can be dumped, inspected or edited by hand, and re-counted.

use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;

use conv_regions::oracle::{Arrangement, Hyperplane, OracleError};

use crate::CliError;

/// Renders an arrangement, one hyperplane per line.
pub fn write_arrangement(arrangement: &Arrangement) -> String {
    let mut out = String::new();
    for plane in arrangement.hyperplanes() {
        let mut first = true;
        for entry in plane.normal.iter().chain(std::iter::once(&plane.offset)) {
            if !first {
                out.push(' ');
            }
            out.push_str(&render(entry));
            first = false;
        }
        out.push('\n');
    }
    out
}

fn render(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses the text form back into an arrangement.
///
/// Malformed entries, inconsistent line widths, and empty files are parse
/// errors; a well-formed file describing an invalid arrangement (for
/// example a zero normal) is a validation error.
pub fn parse_arrangement(text: &str) -> Result<Arrangement, CliError> {
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut entries = Vec::new();
        for token in line.split_whitespace() {
            let value = BigRational::from_str(token).map_err(|e| {
                CliError::Parse(format!("line {}: `{token}`: {e}", number + 1))
            })?;
            entries.push(value);
        }
        if entries.len() < 2 {
            return Err(CliError::Parse(format!(
                "line {}: a hyperplane needs at least one normal coordinate and an offset",
                number + 1
            )));
        }
        if let Some(previous) = rows.first() {
            if entries.len() != previous.len() {
                return Err(CliError::Parse(format!(
                    "line {}: {} entries, but earlier lines have {}",
                    number + 1,
                    entries.len(),
                    previous.len()
                )));
            }
        }
        rows.push(entries);
    }
    let ambient = match rows.first() {
        Some(row) => row.len() - 1,
        None => return Err(CliError::Parse("arrangement file has no hyperplanes".into())),
    };
    let hyperplanes = rows
        .into_iter()
        .map(|mut entries| {
            let offset = entries.pop().expect("checked at least two entries");
            Hyperplane { normal: entries, offset }
        })
        .collect();
    Arrangement::new(ambient, hyperplanes).map_err(|e| match e {
        OracleError::ZeroNormal { index } => {
            CliError::Validation(format!("hyperplane {index} has a zero normal"))
        }
        other => other.into(),
    })
}
