//! CSV ingestion for real-world series: loading with missing-value markers,
//! forward-fill repair, and block-mean downsampling.

use std::path::PathBuf;

use crate::datagen::Series;
use crate::error::{Error, Result};

/// Target column selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSel {
    Name(String),
    Index(usize),
}

/// How to read one scalar series out of a delimited file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSpec {
    pub path: PathBuf,
    pub delimiter: u8,
    pub column: ColumnSel,
    /// Cell content treated as a missing measurement.
    pub missing_token: String,
    /// Block size for mean downsampling; 1 keeps the series as-is.
    pub downsample: usize,
    /// Stop after this many data rows when set.
    pub max_rows: Option<usize>,
}

impl CsvSpec {
    pub fn new(path: impl Into<PathBuf>, column: ColumnSel) -> CsvSpec {
        CsvSpec {
            path: path.into(),
            delimiter: b';',
            column,
            missing_token: "?".to_string(),
            downsample: 1,
            max_rows: None,
        }
    }
}

/// Read the target column in row order; unparseable cells and the missing
/// token become `None`. When the column is selected by name the first row
/// must be a header; an index selection treats a non-numeric first row as a
/// header and skips it.
pub fn load_series_csv(spec: &CsvSpec) -> Result<Vec<Option<f64>>> {
    let file = std::fs::File::open(&spec.path).map_err(|e| {
        Error::Config(format!("cannot open {}: {e}", spec.path.display()))
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(file);

    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| Error::Parse(format!("{}: {e}", spec.path.display())))?,
        None => return Err(Error::Parse(format!("{}: no rows", spec.path.display()))),
    };

    let (col, first_value) = match &spec.column {
        ColumnSel::Name(name) => {
            let col = first
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "column {name:?} not present in header of {}",
                        spec.path.display()
                    ))
                })?;
            (col, None)
        }
        ColumnSel::Index(col) => {
            let cell = first.get(*col).map(str::trim);
            match cell {
                Some(c) if c.parse::<f64>().is_ok() || c == spec.missing_token => {
                    (*col, Some(parse_cell(c, &spec.missing_token)))
                }
                // Non-numeric first row: treat as header.
                _ => (*col, None),
            }
        }
    };

    let mut values = Vec::new();
    if let Some(v) = first_value {
        values.push(v);
    }
    for record in records {
        if spec.max_rows.is_some_and(|m| values.len() >= m) {
            break;
        }
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", spec.path.display())))?;
        let cell = record.get(col).map(str::trim).unwrap_or("");
        values.push(parse_cell(cell, &spec.missing_token));
    }
    if let Some(m) = spec.max_rows {
        values.truncate(m);
    }
    if values.is_empty() {
        return Err(Error::Parse(format!(
            "{}: no data rows parsed",
            spec.path.display()
        )));
    }
    Ok(values)
}

fn parse_cell(cell: &str, missing_token: &str) -> Option<f64> {
    if cell == missing_token {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Replace each missing value with the nearest preceding observation.
pub fn clean_missing(raw: &[Option<f64>]) -> Result<Series> {
    if raw.is_empty() {
        return Err(Error::Config("cannot clean an empty series".into()));
    }
    let mut last = match raw[0] {
        Some(v) => v,
        None => {
            return Err(Error::Config(
                "leading value is missing; forward-fill has no anchor".into(),
            ))
        }
    };
    let mut out = Vec::with_capacity(raw.len());
    for v in raw {
        if let Some(v) = v {
            last = *v;
        }
        out.push(last);
    }
    Ok(Series::new(out))
}

/// Mean of each consecutive block of `k` values; a trailing partial block is
/// dropped.
pub fn downsample(series: &Series, k: usize) -> Result<Series> {
    if k == 0 {
        return Err(Error::Config("downsample factor must be >= 1".into()));
    }
    if k == 1 {
        return Ok(series.clone());
    }
    let values = series
        .values
        .chunks_exact(k)
        .map(|block| block.iter().sum::<f64>() / k as f64)
        .collect();
    Ok(Series::new(values))
}

/// Full pipeline: load, forward-fill, downsample.
pub fn ingest(spec: &CsvSpec) -> Result<Series> {
    let raw = load_series_csv(spec)?;
    let cleaned = clean_missing(&raw)?;
    downsample(&cleaned, spec.downsample)
}
