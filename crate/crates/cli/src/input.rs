//! CSV ingestion with row-level error reporting.

use std::fmt;
use std::fs::File;
use std::io::{self, Read};

use anyhow::{bail, Context};
use late_phase::data::{Observation, SampleData};
use sha2::{Digest, Sha256};

/// Names of the outcome, treatment and instrument columns.
#[derive(Debug, Clone)]
pub struct Columns {
    pub y: String,
    pub d: String,
    pub z: String,
}

/// Raw bytes of an input file or of stdin when `path` is `-`.
pub fn read_source(path: &str) -> anyhow::Result<Vec<u8>> {
    let mut bytes = Vec::new();
    if path == "-" {
        io::stdin().read_to_end(&mut bytes).context("reading stdin")?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .with_context(|| format!("reading {path}"))?;
    }
    Ok(bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug)]
pub struct RowError {
    pub line: u64,
    pub column: String,
    pub problem: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: column '{}': {}", self.line, self.column, self.problem)
    }
}

/// All bad rows found in one pass.
#[derive(Debug)]
pub struct RowErrors(pub Vec<RowError>);

const SHOWN: usize = 20;

impl fmt::Display for RowErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} invalid cell(s) in input", self.0.len())?;
        for e in self.0.iter().take(SHOWN) {
            writeln!(f, "  {e}")?;
        }
        if self.0.len() > SHOWN {
            writeln!(f, "  ... {} more", self.0.len() - SHOWN)?;
        }
        Ok(())
    }
}

impl std::error::Error for RowErrors {}

fn column_index(headers: &csv::StringRecord, name: &str) -> anyhow::Result<usize> {
    match headers.iter().position(|h| h.trim() == name) {
        Some(i) => Ok(i),
        None => bail!(
            "column '{name}' not found; header has [{}] (use --y-col/--d-col/--z-col)",
            headers.iter().collect::<Vec<_>>().join(", ")
        ),
    }
}

/// Parsed table: the three analysis columns plus the full header and records
/// so that other columns can be passed through.
pub struct Table {
    pub headers: csv::StringRecord,
    pub records: Vec<csv::StringRecord>,
    pub index: [usize; 3],
    pub data: SampleData,
}

pub fn parse_csv(bytes: &[u8], columns: &Columns) -> anyhow::Result<Table> {
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        bail!("input is empty");
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers().context("reading header row")?.clone();
    let index = [
        column_index(&headers, &columns.y)?,
        column_index(&headers, &columns.d)?,
        column_index(&headers, &columns.z)?,
    ];

    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for record in reader.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line());
        let mut cell = |i: usize, name: &str| -> Option<f64> {
            let raw = record.get(i).unwrap_or("").trim();
            let problem = if raw.is_empty() {
                "missing value".to_string()
            } else {
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => return Some(v),
                    Ok(_) => format!("non-finite value '{raw}'"),
                    Err(_) => format!("not a number: '{raw}'"),
                }
            };
            errors.push(RowError {
                line,
                column: name.to_string(),
                problem,
            });
            None
        };
        let y = cell(index[0], &columns.y);
        let d = cell(index[1], &columns.d);
        let z = cell(index[2], &columns.z);
        let mut flag = |v: Option<f64>, name: &str| -> Option<bool> {
            match v? {
                0.0 => Some(false),
                1.0 => Some(true),
                x => {
                    errors.push(RowError {
                        line,
                        column: name.to_string(),
                        problem: format!("must be 0 or 1, found {x}"),
                    });
                    None
                }
            }
        };
        let d = flag(d, &columns.d);
        let z = flag(z, &columns.z);
        if let (Some(y), Some(d), Some(z)) = (y, d, z) {
            rows.push(Observation::new(y, d, z));
        }
        records.push(record);
    }
    if !errors.is_empty() {
        return Err(RowErrors(errors).into());
    }
    if rows.is_empty() {
        bail!("input has a header but no data rows");
    }
    Ok(Table {
        headers,
        records,
        index,
        data: SampleData::new(rows)?,
    })
}
