// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reading observation matrices and marker maps from delimited text.
//!
//! Matrices hold one sample per row and one variable per column. Fields are
//! separated by commas, tabs or semicolons (detected from the first line
//! unless given). A first line containing any non-numeric field other than
//! `NA` is taken as a header. `NA` marks a missing cell.

use std::fs;
use std::path::Path;

use blockseg_core::{DataMatrix, Error as CoreError, FamilyKind, MarkerMap};

use crate::error::{Error, Result};

pub const MISSING: &str = "NA";

const CANDIDATES: [u8; 3] = *b",\t;";

/// Most frequent candidate delimiter on the first nonempty line; comma if
/// none occurs.
pub fn detect_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    CANDIDATES
        .iter()
        .copied()
        .map(|d| (first.bytes().filter(|&b| b == d).count(), d))
        .filter(|(count, _)| *count > 0)
        .max_by_key(|(count, _)| *count)
        .map_or(b',', |(_, d)| d)
}

fn records(text: &str, delimiter: u8) -> Result<Vec<(usize, Vec<String>)>, csv::Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn is_header(fields: &[String]) -> bool {
    fields
        .iter()
        .any(|f| f != MISSING && f.parse::<f64>().is_err())
}

/// Parses matrix text and validates it against `family`.
///
/// `source` names the input in error messages.
pub fn parse_matrix(
    text: &str,
    family: &FamilyKind,
    delimiter: Option<u8>,
    source: &Path,
) -> Result<DataMatrix> {
    let delimiter = delimiter.unwrap_or_else(|| detect_delimiter(text));
    let mut rows = records(text, delimiter).map_err(|e| Error::data(source, e.to_string()))?;
    if rows.first().is_some_and(|(_, f)| is_header(f)) {
        rows.remove(0);
    }
    if rows.is_empty() {
        return Err(Error::data(source, "no data rows"));
    }
    let m = rows[0].1.len();
    let n = rows.len();
    let mut cells = Vec::with_capacity(n * m);
    let mut mask = Vec::with_capacity(n * m);
    for (i, (line, fields)) in rows.iter().enumerate() {
        if fields.len() != m {
            return Err(Error::data(
                source,
                format!(
                    "ragged input: line {line} (row {}) has {} fields, expected {m}",
                    i + 1,
                    fields.len()
                ),
            ));
        }
        for (j, f) in fields.iter().enumerate() {
            if f == MISSING {
                cells.push(0.0);
                mask.push(false);
                continue;
            }
            let x: f64 = f.parse().map_err(|_| {
                Error::data(
                    source,
                    format!(
                        "row {}, column {}: cannot parse {f:?} as a number",
                        i + 1,
                        j + 1
                    ),
                )
            })?;
            cells.push(x);
            mask.push(true);
        }
    }
    let data = DataMatrix::with_mask(n, m, cells, mask).map_err(|e| core_data_error(source, e))?;
    family
        .validate_data(&data)
        .map_err(|e| core_data_error(source, e))?;
    Ok(data)
}

fn core_data_error(source: &Path, e: CoreError) -> Error {
    match e {
        CoreError::InvalidFamily(_) => Error::Core(e),
        other => Error::data(source, other.to_string()),
    }
}

pub fn load_matrix(path: &Path, family: &FamilyKind, delimiter: Option<u8>) -> Result<DataMatrix> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_matrix(&text, family, delimiter, path)
}

/// Parses a marker map: one base-pair position per line, or two columns
/// `index, position`. Must list exactly `m` nondecreasing positions.
pub fn parse_marker_map(text: &str, m: usize, source: &Path) -> Result<MarkerMap> {
    let delimiter = detect_delimiter(text);
    let mut rows = records(text, delimiter).map_err(|e| Error::data(source, e.to_string()))?;
    if rows.first().is_some_and(|(_, f)| is_header(f)) {
        rows.remove(0);
    }
    let mut positions = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let field = match fields.as_slice() {
            [pos] | [_, pos] => pos,
            _ => {
                return Err(Error::data(
                    source,
                    format!("line {line}: expected `position` or `index,position`"),
                ))
            }
        };
        let pos: u64 = field.parse().map_err(|_| {
            Error::data(
                source,
                format!("line {line}: {field:?} is not a nonnegative integer"),
            )
        })?;
        positions.push(pos);
    }
    if positions.len() != m {
        return Err(Error::data(
            source,
            format!(
                "marker map lists {} positions, data has m = {m}",
                positions.len()
            ),
        ));
    }
    MarkerMap::new(positions).map_err(|e| Error::data(source, e.to_string()))
}

pub fn load_marker_map(path: &Path, m: usize) -> Result<MarkerMap> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_marker_map(&text, m, path)
}
