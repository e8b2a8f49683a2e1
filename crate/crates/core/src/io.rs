//! Text formats: attribute matrix CSV files, name lists and number formatting.
//!
//! A matrix file has a header row of unique attribute names followed by one
//! row per exemplar. Entries are `-1`/`+1` (`1` is accepted for `+1`), or
//! `0`/`1` when read with [`Encoding::ZeroOne`]. Every row must have exactly
//! as many fields as the header.

use std::collections::HashSet;

use csv::{ReaderBuilder, Trim};

use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    PlusMinusOne,
    ZeroOne,
}

fn parse_error(line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn from_csv_error(err: &csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => parse_error(
            line,
            (*len as usize).min(*expected_len as usize) + 1,
            format!("row has {len} fields, header has {expected_len}"),
        ),
        csv::ErrorKind::Utf8 { err, .. } => parse_error(line, err.field() + 1, "invalid UTF-8"),
        _ => parse_error(line, 0, err.to_string()),
    }
}

/// Parses a matrix file from raw bytes.
pub fn parse_matrix(input: &[u8], encoding: Encoding) -> Result<AttributeMatrix> {
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .flexible(false)
        .from_reader(input);

    let header = reader.headers().map_err(|e| from_csv_error(&e))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(parse_error(1, 1, "missing header row"));
    }
    let mut names = Vec::with_capacity(header.len());
    let mut seen = HashSet::with_capacity(header.len());
    for (c, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(parse_error(1, c + 1, "empty attribute name"));
        }
        if !seen.insert(name) {
            return Err(parse_error(1, c + 1, format!("duplicate attribute name `{name}`")));
        }
        names.push(name.to_owned());
    }

    let mut columns: Vec<Vec<i8>> = vec![Vec::new(); names.len()];
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(from_csv_error(&e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        for (c, field) in record.iter().enumerate() {
            let value = match (encoding, field) {
                (Encoding::PlusMinusOne, "1" | "+1") => 1,
                (Encoding::PlusMinusOne, "-1") => -1,
                (Encoding::ZeroOne, "1") => 1,
                (Encoding::ZeroOne, "0") => -1,
                (Encoding::PlusMinusOne, other) => {
                    return Err(parse_error(line, c + 1, format!("expected -1 or +1, found `{other}`")))
                }
                (Encoding::ZeroOne, other) => {
                    return Err(parse_error(line, c + 1, format!("expected 0 or 1, found `{other}`")))
                }
            };
            columns[c].push(value);
        }
    }
    let n = columns[0].len();
    if n == 0 {
        return Err(parse_error(2, 1, "no exemplar rows"));
    }
    AttributeMatrix::from_columns(n, &columns, Some(names))
}

/// Renders a matrix file. Unnamed columns are written as `attr{k}`.
pub fn write_matrix(m: &AttributeMatrix, encoding: Encoding) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..m.n_columns())
        .map(|k| m.name(k).map_or_else(|| format!("attr{k}"), str::to_owned))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..m.n_exemplars() {
        let row: Vec<&str> = (0..m.n_columns())
            .map(|k| match (encoding, m.get(i, k)) {
                (Encoding::PlusMinusOne, 1) => "1",
                (Encoding::PlusMinusOne, _) => "-1",
                (Encoding::ZeroOne, 1) => "1",
                (Encoding::ZeroOne, _) => "0",
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One name per line; blank lines and lines starting with `#` are skipped.
pub fn parse_name_list(input: &[u8]) -> Result<Vec<String>> {
    let text = std::str::from_utf8(input).map_err(|e| {
        let line = input[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() as u64 + 1;
        parse_error(line, 0, "invalid UTF-8")
    })?;
    let mut names = Vec::new();
    for line in text.lines() {
        let name = line.trim();
        if name.is_empty() || name.starts_with('#') {
            continue;
        }
        names.push(name.to_owned());
    }
    Ok(names)
}

/// Parses a comma-separated, strictly increasing noise grid starting at 0.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let grid = text
        .split(',')
        .enumerate()
        .map(|(i, part)| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| parse_error(1, i + 1, format!("`{}` is not a noise count", part.trim())))
        })
        .collect::<Result<Vec<usize>>>()?;
    crate::interpolate::check_grid(&grid)?;
    Ok(grid)
}

/// Rounds to 12 significant digits and prints the shortest form that reads
/// back to the rounded value, always with a decimal point or exponent.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{:?}", round_sig(x))
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x == 0.0 {
        return 0.0;
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

/// Renders a CSV table; numbers go through [`format_float`].
pub fn write_table(header: &[&str], rows: &[Vec<TableCell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(TableCell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableCell {
    Text(String),
    Int(i64),
    Float(f64),
}

impl TableCell {
    fn render(&self) -> String {
        match self {
            TableCell::Text(s) => s.clone(),
            TableCell::Int(i) => i.to_string(),
            TableCell::Float(f) => format_float(*f),
        }
    }
}
