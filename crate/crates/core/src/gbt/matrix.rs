use crate::data::{Column, Dataset};
use crate::error::{Error, Result};

/// Column-major numeric view of an encoded dataset. `NaN` is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_features: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != n_rows) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: n_rows,
            });
        }
        Ok(Self {
            n_rows,
            n_features: columns.len(),
            values: columns.into_iter().flatten().collect(),
        })
    }

    /// Requires categorical columns to be encoded already.
    pub fn from_dataset(data: &Dataset) -> Result<Self> {
        let columns = data
            .columns
            .iter()
            .zip(&data.schema.columns)
            .map(|(col, spec)| match col {
                Column::Numeric(v) => Ok(v.clone()),
                Column::Encoded(v) => Ok(v.iter().map(|&c| c as f64).collect()),
                Column::Categorical { .. } => Err(Error::ColumnMismatch(format!(
                    "categorical column {:?} must be encoded before training",
                    spec.name
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = Self::from_columns(columns)?;
        m.n_rows = data.n_rows();
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[feature * self.n_rows + row]
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.values[feature * self.n_rows..(feature + 1) * self.n_rows]
    }
}

/// Per feature: non-missing rows in ascending value order (ties by row), their
/// values, and the rows where the feature is missing.
pub(crate) struct SortedColumns {
    rows: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
    missing: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(matrix: &FeatureMatrix) -> Self {
        let mut rows = Vec::with_capacity(matrix.n_features());
        let mut values = Vec::with_capacity(matrix.n_features());
        let mut missing = Vec::with_capacity(matrix.n_features());
        for f in 0..matrix.n_features() {
            let col = matrix.column(f);
            let mut present: Vec<u32> = Vec::with_capacity(col.len());
            let mut absent = Vec::new();
            for (r, x) in col.iter().enumerate() {
                if x.is_nan() {
                    absent.push(r as u32);
                } else {
                    present.push(r as u32);
                }
            }
            present.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            values.push(present.iter().map(|&r| col[r as usize]).collect());
            rows.push(present);
            missing.push(absent);
        }
        Self { rows, values, missing }
    }

    pub fn column(&self, feature: usize) -> (&[u32], &[f64]) {
        (&self.rows[feature], &self.values[feature])
    }

    pub fn missing(&self, feature: usize) -> &[u32] {
        &self.missing[feature]
    }
}
