//! Tabular datasets: schema, column storage, CSV IO, fitted transforms and
//! the row-selection helpers used by the experiments.
//!
//! Columns are stored column-major. Numeric cells use `NaN` as the missing
//! marker; raw categorical cells are interned per column; encoded categorical
//! cells are integer codes where `-1` is reserved for unseen or missing tokens.

mod csv_io;
mod split;
mod transform;

pub use csv_io::{load_csv, load_prepared_csv, read_csv, read_prepared_csv, write_csv};
pub use split::{stratified_subset, time_split, time_split_fraction};
pub use transform::{
    apply_encoder, apply_scaler, fit_encoder, fit_scaler, replace_missing, EncoderColumn,
    EncoderState, MissingPolicy, ScalerColumn, ScalerState, TransformState, RESERVED_CODE,
    STATE_VERSION,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
        }
    }
}

/// Ordered feature columns plus the label and optional time column names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub columns: Vec<ColumnSpec>,
    pub label_column: String,
    #[serde(default)]
    pub time_column: Option<String>,
}

impl FeatureSchema {
    pub fn new(
        columns: Vec<ColumnSpec>,
        label_column: impl Into<String>,
        time_column: Option<String>,
    ) -> Result<Self> {
        let schema = Self {
            columns,
            label_column: label_column.into(),
            time_column,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::Schema("at least one feature column is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {:?}", c.name)));
            }
        }
        if seen.contains(self.label_column.as_str()) {
            return Err(Error::Schema(format!(
                "label column {:?} is listed among the features",
                self.label_column
            )));
        }
        if let Some(t) = &self.time_column {
            if seen.contains(t.as_str()) || *t == self.label_column {
                return Err(Error::Schema(format!(
                    "time column {t:?} collides with another column"
                )));
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn numeric_columns(&self) -> impl Iterator<Item = (usize, &ColumnSpec)> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Numeric)
    }

    pub fn categorical_columns(&self) -> impl Iterator<Item = (usize, &ColumnSpec)> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Categorical)
    }

    /// Stable hex digest of the feature names and kinds.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for c in &self.columns {
            hasher.update(c.name.as_bytes());
            hasher.update([0u8]);
            hasher.update(match c.kind {
                ColumnKind::Numeric => b"n",
                ColumnKind::Categorical => b"c",
            });
            hasher.update([0u8]);
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let schema: FeatureSchema =
            serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    /// `NaN` marks a missing cell.
    Numeric(Vec<f64>),
    /// Raw tokens, interned: `ids[i]` indexes into `vocab`, `None` is missing.
    Categorical {
        vocab: Vec<String>,
        ids: Vec<Option<u32>>,
    },
    /// Ordinal codes after encoding; `-1` is the reserved code.
    Encoded(Vec<i32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical { ids, .. } => ids.len(),
            Column::Encoded(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical { vocab, ids } => Column::Categorical {
                vocab: vocab.clone(),
                ids: rows.iter().map(|&r| ids[r]).collect(),
            },
            Column::Encoded(v) => Column::Encoded(rows.iter().map(|&r| v[r]).collect()),
        }
    }

    pub fn cell(&self, row: usize) -> Cell<'_> {
        match self {
            Column::Numeric(v) if v[row].is_nan() => Cell::Missing,
            Column::Numeric(v) => Cell::Number(v[row]),
            Column::Categorical { vocab, ids } => match ids[row] {
                Some(id) => Cell::Token(&vocab[id as usize]),
                None => Cell::Missing,
            },
            Column::Encoded(v) => Cell::Code(v[row]),
        }
    }

    pub fn missing_count(&self) -> usize {
        match self {
            Column::Numeric(v) => v.iter().filter(|x| x.is_nan()).count(),
            Column::Categorical { ids, .. } => ids.iter().filter(|x| x.is_none()).count(),
            Column::Encoded(_) => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Number(f64),
    Token(&'a str),
    Code(i32),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub columns: Vec<Column>,
    pub labels: Vec<u8>,
    pub time_index: Option<Vec<i64>>,
}

impl Dataset {
    pub fn new(
        schema: FeatureSchema,
        columns: Vec<Column>,
        labels: Vec<u8>,
        time_index: Option<Vec<i64>>,
    ) -> Result<Self> {
        schema.validate()?;
        if columns.len() != schema.n_features() {
            return Err(Error::ColumnMismatch(format!(
                "schema has {} features, got {} columns",
                schema.n_features(),
                columns.len()
            )));
        }
        let n = labels.len();
        for (spec, col) in schema.columns.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    left: col.len(),
                    right: n,
                });
            }
            let ok = matches!(
                (spec.kind, col),
                (ColumnKind::Numeric, Column::Numeric(_))
                    | (ColumnKind::Categorical, Column::Categorical { .. })
                    | (ColumnKind::Categorical, Column::Encoded(_))
            );
            if !ok {
                return Err(Error::ColumnMismatch(format!(
                    "column {:?} storage does not match its kind",
                    spec.name
                )));
            }
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::NonBinaryLabel {
                row: labels.iter().position(|x| x == l).unwrap_or(0),
                value: l.to_string(),
            });
        }
        if let Some(t) = &time_index {
            if t.len() != n {
                return Err(Error::LengthMismatch {
                    left: t.len(),
                    right: n,
                });
            }
            if t.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Schema("time index is not sorted".into()));
            }
        }
        Ok(Self {
            schema,
            columns,
            labels,
            time_index,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_negatives(&self) -> usize {
        self.n_rows() - self.n_positives()
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.n_positives() as f64 / self.n_rows() as f64
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell<'_> {
        self.columns[col].cell(row)
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().map(Column::missing_count).sum()
    }

    /// Rows at `rows`, in the given order (duplicates allowed).
    pub fn take(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            time_index: self
                .time_index
                .as_ref()
                .map(|t| rows.iter().map(|&r| t[r]).collect()),
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        let rows: Vec<usize> = range.collect();
        self.take(&rows)
    }

    pub fn class_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if l == 1 {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
        (pos, neg)
    }

    /// True once every categorical column holds ordinal codes.
    pub fn is_encoded(&self) -> bool {
        !self
            .columns
            .iter()
            .any(|c| matches!(c, Column::Categorical { .. }))
    }
}
