//! On-disk formats: line-oriented JSON for datasets, a keyed text document
//! for trained models.
//!
//! Both formats are plain text with platform-independent line handling, and
//! both carry a format_version field. Model floats are printed with 17
//! fractional digits of scientific notation, enough for an exact
//! double-precision round trip; dataset floats rely on the shortest
//! round-trip representation of the JSON writer. Either way, reloading
//! reproduces the original bits.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::basis::{BasisSpec, PolyFamily};
use crate::linalg::SymMatrix;
use crate::moments::{Bag, BagDataset, NormalizationMode};
use crate::regression::TrainedModel;
use crate::synthetic::ExperimentConfig;
use crate::{Error, Result};

/// Version written into every file; readers reject anything else.
pub const FORMAT_VERSION: u32 = 1;

/// Basis description as it appears in file metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisMeta {
    pub family: PolyFamily,
    pub degree_count: usize,
    pub domain: (f64, f64),
}

impl BasisMeta {
    pub fn of(spec: &BasisSpec) -> Self {
        BasisMeta {
            family: spec.family(),
            degree_count: spec.degree_count(),
            domain: spec.domain(),
        }
    }

    /// Validated conversion back into a usable basis.
    pub fn to_spec(self) -> Result<BasisSpec> {
        BasisSpec::new(self.family, self.degree_count, self.domain.0, self.domain.1)
    }
}

/// Optional first line of a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    /// Present when the dataset was generated synthetically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<ExperimentConfig>,
    /// Present when a basis has been chosen for this dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisMeta>,
}

impl DatasetMeta {
    pub fn new() -> Self {
        DatasetMeta {
            format_version: FORMAT_VERSION,
            generator: None,
            basis: None,
        }
    }
}

impl Default for DatasetMeta {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Serialize, Deserialize)]
struct BagRecord {
    xs: Vec<f64>,
    y: f64,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Writes one bag per line, with an optional metadata header line first.
pub fn save_dataset_with_meta(
    dataset: &BagDataset,
    meta: Option<&DatasetMeta>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    if let Some(meta) = meta {
        let header = serde_json::to_string(meta).expect("metadata serializes");
        writeln!(out, "{header}")?;
    }
    for bag in dataset.bags() {
        let record = BagRecord {
            xs: bag.observations().to_vec(),
            y: bag.label(),
        };
        let line = serde_json::to_string(&record).expect("finite reals serialize");
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_dataset(dataset: &BagDataset, path: impl AsRef<Path>) -> Result<()> {
    save_dataset_with_meta(dataset, None, path)
}

/// Reads a dataset and whatever metadata its header carried.
pub fn load_dataset_with_meta(path: impl AsRef<Path>) -> Result<(BagDataset, Option<DatasetMeta>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut meta = None;
    let mut bags = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let number = index + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(trimmed)
            .map_err(|e| parse_error(number, format!("not a JSON record: {e}")))?;
        if number == 1 && value.get("xs").is_none() {
            let parsed: DatasetMeta = serde_json::from_value(value)
                .map_err(|e| parse_error(number, format!("bad header: {e}")))?;
            if parsed.format_version != FORMAT_VERSION {
                return Err(Error::FormatVersion {
                    found: parsed.format_version,
                    expected: FORMAT_VERSION,
                });
            }
            meta = Some(parsed);
            continue;
        }
        let record: BagRecord = serde_json::from_value(value)
            .map_err(|e| parse_error(number, format!("bad bag record: {e}")))?;
        let bag = Bag::new(record.xs, record.y)
            .map_err(|e| parse_error(number, format!("invalid bag: {e}")))?;
        bags.push(bag);
    }
    if bags.is_empty() {
        return Err(Error::InvalidInput("dataset file has no bags".into()));
    }
    Ok((BagDataset::new(bags)?, meta))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<BagDataset> {
    load_dataset_with_meta(path).map(|(dataset, _)| dataset)
}

/// 17 fractional digits of scientific notation: one digit more than the
/// decimal-to-binary round-trip bound needs.
fn full(x: f64) -> String {
    format!("{x:.17e}")
}

fn full_row(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| full(*v)).collect();
    parts.join(" ")
}

/// Writes a fitted model as a keyed text document. The file holds the
/// accumulated statistics, not their factorization; reloading refactors
/// from the same bits and therefore predicts identically.
pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let spec = model.basis();
    let (a, b) = spec.domain();
    let (lo, hi) = model.label_range();
    writeln!(out, "format_version {FORMAT_VERSION}")?;
    writeln!(out, "family {}", spec.family())?;
    writeln!(out, "degree_count {}", spec.degree_count())?;
    writeln!(out, "domain {} {}", full(a), full(b))?;
    writeln!(out, "mode {}", model.mode())?;
    writeln!(out, "mean_bag_size {}", full(model.mean_bag_size()))?;
    writeln!(out, "label_range {} {}", full(lo), full(hi))?;
    writeln!(out, "label_projection {}", full_row(model.label_projection()))?;
    for row in model.gram().to_rows() {
        writeln!(out, "gram_row {}", full_row(&row))?;
    }
    for row in model.label_weighted_gram().to_rows() {
        writeln!(out, "label_gram_row {}", full_row(&row))?;
    }
    out.flush()?;
    Ok(())
}

struct ModelLines {
    lines: Vec<String>,
    cursor: usize,
}

impl ModelLines {
    fn next(&mut self, key: &str) -> Result<(usize, String)> {
        loop {
            if self.cursor >= self.lines.len() {
                return Err(parse_error(
                    self.lines.len() + 1,
                    format!("unexpected end of file, expected {key}"),
                ));
            }
            let number = self.cursor + 1;
            let line = self.lines[self.cursor].trim().to_string();
            self.cursor += 1;
            if line.is_empty() {
                continue;
            }
            let (found, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
            if found != key {
                return Err(parse_error(number, format!("expected {key}, found {found}")));
            }
            return Ok((number, rest.trim().to_string()));
        }
    }
}

fn parse_floats(line: usize, text: &str, want: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| parse_error(line, format!("bad number {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != want {
        return Err(parse_error(
            line,
            format!("expected {want} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

/// Reads a model file back. Any structural defect is a parse error naming
/// the offending line; nothing is returned for a partial file.
pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let reader = BufReader::new(File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let mut doc = ModelLines { lines, cursor: 0 };

    let (line, text) = doc.next("format_version")?;
    let version: u32 = text
        .parse()
        .map_err(|_| parse_error(line, format!("bad version {text:?}")))?;
    if version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }

    let (line, text) = doc.next("family")?;
    let family: PolyFamily = text
        .parse()
        .map_err(|_| parse_error(line, format!("unknown family {text:?}")))?;

    let (line, text) = doc.next("degree_count")?;
    let degree_count: usize = text
        .parse()
        .map_err(|_| parse_error(line, format!("bad degree count {text:?}")))?;

    let (line, text) = doc.next("domain")?;
    let domain = parse_floats(line, &text, 2)?;
    let spec = BasisSpec::new(family, degree_count, domain[0], domain[1])
        .map_err(|e| parse_error(line, e.to_string()))?;

    let (line, text) = doc.next("mode")?;
    let mode: NormalizationMode = text
        .parse()
        .map_err(|_| parse_error(line, format!("unknown mode {text:?}")))?;

    let (line, text) = doc.next("mean_bag_size")?;
    let mean_bag_size = parse_floats(line, &text, 1)?[0];

    let (line, text) = doc.next("label_range")?;
    let range = parse_floats(line, &text, 2)?;

    let (line, text) = doc.next("label_projection")?;
    let label_proj = parse_floats(line, &text, degree_count)?;

    let mut gram_rows = Vec::with_capacity(degree_count);
    for _ in 0..degree_count {
        let (line, text) = doc.next("gram_row")?;
        gram_rows.push((line, parse_floats(line, &text, degree_count)?));
    }
    let first_gram_line = gram_rows[0].0;
    let gram_values: Vec<Vec<f64>> = gram_rows.into_iter().map(|(_, row)| row).collect();
    let gram = SymMatrix::from_rows(&gram_values)
        .map_err(|e| parse_error(first_gram_line, e.to_string()))?;

    let mut label_rows = Vec::with_capacity(degree_count);
    for _ in 0..degree_count {
        let (line, text) = doc.next("label_gram_row")?;
        label_rows.push((line, parse_floats(line, &text, degree_count)?));
    }
    let first_label_line = label_rows[0].0;
    let label_values: Vec<Vec<f64>> = label_rows.into_iter().map(|(_, row)| row).collect();
    let label_gram = SymMatrix::from_rows(&label_values)
        .map_err(|e| parse_error(first_label_line, e.to_string()))?;

    TrainedModel::from_statistics(
        spec,
        mode,
        gram,
        label_gram,
        label_proj,
        mean_bag_size,
        (range[0], range[1]),
    )
}
