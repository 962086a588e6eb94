use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{Column, ColumnKind, Dataset, FeatureSchema};
use crate::error::{Error, Result};

/// Where each schema column lives in the CSV header.
struct HeaderLayout {
    features: Vec<usize>,
    label: usize,
    time: Option<usize>,
}

/// Feature columns must appear in schema order; the label and time columns may
/// sit anywhere in the header.
fn resolve_header(header: &csv::StringRecord, schema: &FeatureSchema) -> Result<HeaderLayout> {
    let found: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    let mismatch = || Error::HeaderMismatch {
        expected: expected_header(schema),
        found: found.clone(),
    };
    let label = found
        .iter()
        .position(|h| *h == schema.label_column)
        .ok_or_else(mismatch)?;
    let time = match &schema.time_column {
        Some(t) => Some(found.iter().position(|h| h == t).ok_or_else(mismatch)?),
        None => None,
    };
    let features: Vec<usize> = (0..found.len())
        .filter(|&i| i != label && Some(i) != time)
        .collect();
    let names: Vec<&str> = features.iter().map(|&i| found[i].as_str()).collect();
    let expected: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    if names != expected {
        return Err(mismatch());
    }
    Ok(HeaderLayout {
        features,
        label,
        time,
    })
}

fn expected_header(schema: &FeatureSchema) -> Vec<String> {
    let mut h: Vec<String> = schema.columns.iter().map(|c| c.name.clone()).collect();
    h.push(schema.label_column.clone());
    if let Some(t) = &schema.time_column {
        h.push(t.clone());
    }
    h
}

fn parse_label(raw: &str, row: usize) -> Result<u8> {
    match raw.trim() {
        "0" | "0.0" => Ok(0),
        "1" | "1.0" => Ok(1),
        other => Err(Error::NonBinaryLabel {
            row,
            value: other.to_string(),
        }),
    }
}

enum Builder {
    Numeric(Vec<f64>),
    Categorical {
        lookup: HashMap<String, u32>,
        vocab: Vec<String>,
        ids: Vec<Option<u32>>,
    },
    Encoded(Vec<i32>),
}

impl Builder {
    fn push(&mut self, raw: &str, column: &str, row: usize) -> Result<()> {
        let raw = raw.trim();
        match self {
            Builder::Numeric(v) => {
                if raw.is_empty() {
                    v.push(f64::NAN);
                } else {
                    let x: f64 = raw.parse().map_err(|_| Error::NumericParse {
                        column: column.to_string(),
                        row,
                        value: raw.to_string(),
                    })?;
                    v.push(x);
                }
            }
            Builder::Categorical { lookup, vocab, ids } => {
                if raw.is_empty() {
                    ids.push(None);
                } else if let Some(&id) = lookup.get(raw) {
                    ids.push(Some(id));
                } else {
                    let id = vocab.len() as u32;
                    vocab.push(raw.to_string());
                    lookup.insert(raw.to_string(), id);
                    ids.push(Some(id));
                }
            }
            Builder::Encoded(v) => {
                let code = if raw.is_empty() {
                    super::RESERVED_CODE
                } else {
                    raw.parse().map_err(|_| Error::NumericParse {
                        column: column.to_string(),
                        row,
                        value: raw.to_string(),
                    })?
                };
                v.push(code);
            }
        }
        Ok(())
    }

    fn finish(self) -> Column {
        match self {
            Builder::Numeric(v) => Column::Numeric(v),
            Builder::Categorical { vocab, ids, .. } => Column::Categorical { vocab, ids },
            Builder::Encoded(v) => Column::Encoded(v),
        }
    }
}

fn read_with<R: Read>(reader: R, schema: &FeatureSchema, prepared: bool) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let layout = resolve_header(&header, schema)?;

    let mut builders: Vec<Builder> = schema
        .columns
        .iter()
        .map(|c| match (c.kind, prepared) {
            (ColumnKind::Numeric, _) => Builder::Numeric(Vec::new()),
            (ColumnKind::Categorical, false) => Builder::Categorical {
                lookup: HashMap::new(),
                vocab: Vec::new(),
                ids: Vec::new(),
            },
            (ColumnKind::Categorical, true) => Builder::Encoded(Vec::new()),
        })
        .collect();
    let mut labels = Vec::new();
    let mut times = layout.time.map(|_| Vec::new());

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for ((b, &idx), spec) in builders.iter_mut().zip(&layout.features).zip(&schema.columns) {
            b.push(&record[idx], &spec.name, row)?;
        }
        labels.push(parse_label(&record[layout.label], row)?);
        if let (Some(ti), Some(times)) = (layout.time, times.as_mut()) {
            let raw = record[ti].trim();
            let t: i64 = raw.parse().map_err(|_| Error::NumericParse {
                column: schema.time_column.clone().unwrap_or_default(),
                row,
                value: raw.to_string(),
            })?;
            times.push(t);
        }
    }

    Dataset::new(
        schema.clone(),
        builders.into_iter().map(Builder::finish).collect(),
        labels,
        times,
    )
}

pub fn read_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset> {
    read_with(reader, schema, false)
}

/// Reads a CSV whose categorical columns already hold ordinal codes.
pub fn read_prepared_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset> {
    read_with(reader, schema, true)
}

pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), schema)
}

pub fn load_prepared_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_prepared_csv(std::io::BufReader::new(file), schema)
}

/// Writes features in schema order, then the label, then the time column.
pub fn write_csv<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(expected_header(&data.schema))?;
    let mut record: Vec<String> = Vec::with_capacity(data.columns.len() + 2);
    for row in 0..data.n_rows() {
        record.clear();
        for col in &data.columns {
            record.push(match col.cell(row) {
                super::Cell::Number(x) => format!("{x}"),
                super::Cell::Token(t) => t.to_string(),
                super::Cell::Code(c) => c.to_string(),
                super::Cell::Missing => String::new(),
            });
        }
        record.push(data.labels[row].to_string());
        if let Some(t) = &data.time_index {
            record.push(t[row].to_string());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
