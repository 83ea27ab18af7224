//! Count files: `position,count` rows or one count per line.

use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// `position,count` per row.
    #[value(name = "csv_position_count")]
    CsvPositionCount,
    /// One count per row; positions are the grid midpoints.
    #[value(name = "csv_count_only")]
    CsvCountOnly,
}

impl FromStr for InputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv_position_count" => Ok(Self::CsvPositionCount),
            "csv_count_only" => Ok(Self::CsvCountOnly),
            _ => Err(CliError::Config(format!("unknown input format `{s}`"))),
        }
    }
}

/// Affine map from original coordinates onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rescaling {
    pub min: f64,
    pub max: f64,
}

impl Rescaling {
    pub fn forward(&self, x: f64) -> f64 {
        if self.max > self.min {
            (x - self.min) / (self.max - self.min)
        } else {
            0.5
        }
    }

    pub fn inverse(&self, t: f64) -> f64 {
        self.min + t * (self.max - self.min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountDataset {
    /// Strictly increasing, in `[0, 1]`.
    pub positions: Vec<f64>,
    pub counts: Vec<u64>,
    /// Positions as read, or the midpoints for count-only files.
    pub original: Vec<f64>,
    pub source: String,
    pub format: InputFormat,
    /// `None` for count-only files.
    pub rescaling: Option<Rescaling>,
}

impl CountDataset {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

fn parse_count(field: &str, path: &Path, line: u64) -> CliResult<u64> {
    let field = field.trim();
    if field.starts_with('-') {
        return Err(CliError::parse(
            path,
            line,
            format!("negative count `{field}`"),
        ));
    }
    field.parse().map_err(|_| {
        CliError::parse(
            path,
            line,
            format!("count `{field}` is not a nonnegative integer"),
        )
    })
}

pub fn ingest(path: &Path, format: InputFormat) -> CliResult<CountDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ingest_str(&text, path, format)
}

/// Parses file contents; `path` only labels errors. Blank lines are
/// skipped and line numbers are 1-based.
pub fn ingest_str(text: &str, path: &Path, format: InputFormat) -> CliResult<CountDataset> {
    let expected = match format {
        InputFormat::CsvPositionCount => 2,
        InputFormat::CsvCountOnly => 1,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut original = Vec::new();
    let mut counts = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != expected {
            return Err(CliError::parse(
                path,
                line,
                format!("expected {expected} field(s), found {}", record.len()),
            ));
        }
        match format {
            InputFormat::CsvPositionCount => {
                let x: f64 = record[0]
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| {
                        CliError::parse(
                            path,
                            line,
                            format!("position `{}` is not a number", &record[0]),
                        )
                    })?;
                if original.last().is_some_and(|prev| x <= *prev) {
                    return Err(CliError::parse(
                        path,
                        line,
                        "positions must be strictly increasing",
                    ));
                }
                original.push(x);
                counts.push(parse_count(&record[1], path, line)?);
            }
            InputFormat::CsvCountOnly => counts.push(parse_count(&record[0], path, line)?),
        }
    }
    if counts.is_empty() {
        return Err(CliError::parse(path, 0, "no data rows"));
    }
    let n = counts.len();
    let (positions, original, rescaling) = match format {
        InputFormat::CsvPositionCount => {
            let r = Rescaling {
                min: original[0],
                max: original[n - 1],
            };
            (
                original.iter().map(|&x| r.forward(x)).collect(),
                original,
                Some(r),
            )
        }
        InputFormat::CsvCountOnly => {
            let mid: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
            (mid.clone(), mid, None)
        }
    };
    Ok(CountDataset {
        positions,
        counts,
        original,
        source: path.display().to_string(),
        format,
        rescaling,
    })
}
