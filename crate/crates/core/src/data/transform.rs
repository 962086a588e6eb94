use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Column, Dataset, FeatureSchema};
use crate::error::{Error, Result};

/// Code given to categorical tokens never seen while fitting, and to missing
/// categorical cells.
pub const RESERVED_CODE: i32 = -1;

/// Version tag written into transform state documents.
pub const STATE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerColumn {
    pub name: String,
    pub min: f64,
    pub max: f64,
    /// Constant or entirely missing on the training data.
    pub degenerate: bool,
}

/// Observed min/max per numeric column, in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub columns: Vec<ScalerColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderColumn {
    pub name: String,
    /// Sorted tokens; a token's code is its position.
    pub tokens: Vec<String>,
}

impl EncoderColumn {
    pub fn code(&self, token: &str) -> i32 {
        self.tokens
            .binary_search_by(|t| t.as_str().cmp(token))
            .map(|i| i as i32)
            .unwrap_or(RESERVED_CODE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    pub columns: Vec<EncoderColumn>,
    pub reserved_code: i32,
}

pub fn fit_scaler(train: &Dataset) -> Result<ScalerState> {
    if train.n_rows() == 0 {
        return Err(Error::Empty("training set"));
    }
    let mut columns = Vec::new();
    for (idx, spec) in train.schema.numeric_columns() {
        let Column::Numeric(values) = &train.columns[idx] else {
            return Err(Error::ColumnMismatch(format!("{} is not numeric", spec.name)));
        };
        let (min, max) = values
            .iter()
            .filter(|x| !x.is_nan())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        let (min, max, degenerate) = if min.is_finite() {
            (min, max, min == max)
        } else {
            (0.0, 0.0, true)
        };
        columns.push(ScalerColumn {
            name: spec.name.clone(),
            min,
            max,
            degenerate,
        });
    }
    Ok(ScalerState { columns })
}

/// Min-max scaling to [0, 1] with clipping; degenerate columns map to 0.
pub fn apply_scaler(state: &ScalerState, data: &Dataset) -> Result<Dataset> {
    let numeric: Vec<_> = data.schema.numeric_columns().collect();
    if numeric.len() != state.columns.len()
        || numeric
            .iter()
            .zip(&state.columns)
            .any(|((_, spec), sc)| spec.name != sc.name)
    {
        return Err(Error::ColumnMismatch(
            "scaler state does not cover the dataset's numeric columns".into(),
        ));
    }
    let mut out = data.clone();
    for ((idx, _), sc) in numeric.iter().zip(&state.columns) {
        let Column::Numeric(values) = &mut out.columns[*idx] else {
            return Err(Error::ColumnMismatch(format!("{} is not numeric", sc.name)));
        };
        let span = sc.max - sc.min;
        for x in values.iter_mut().filter(|x| !x.is_nan()) {
            *x = if sc.degenerate {
                0.0
            } else {
                ((*x - sc.min) / span).clamp(0.0, 1.0)
            };
        }
    }
    Ok(out)
}

pub fn fit_encoder(train: &Dataset) -> Result<EncoderState> {
    if train.n_rows() == 0 {
        return Err(Error::Empty("training set"));
    }
    let mut columns = Vec::new();
    for (idx, spec) in train.schema.categorical_columns() {
        let Column::Categorical { vocab, ids } = &train.columns[idx] else {
            return Err(Error::ColumnMismatch(format!(
                "{} holds codes, not raw tokens",
                spec.name
            )));
        };
        let mut present = vec![false; vocab.len()];
        for id in ids.iter().flatten() {
            present[*id as usize] = true;
        }
        let mut tokens: Vec<String> = vocab
            .iter()
            .zip(present)
            .filter(|(_, p)| *p)
            .map(|(t, _)| t.clone())
            .collect();
        tokens.sort();
        columns.push(EncoderColumn {
            name: spec.name.clone(),
            tokens,
        });
    }
    Ok(EncoderState {
        columns,
        reserved_code: RESERVED_CODE,
    })
}

pub fn apply_encoder(state: &EncoderState, data: &Dataset) -> Result<Dataset> {
    let categorical: Vec<_> = data.schema.categorical_columns().collect();
    if categorical.len() != state.columns.len()
        || categorical
            .iter()
            .zip(&state.columns)
            .any(|((_, spec), ec)| spec.name != ec.name)
    {
        return Err(Error::ColumnMismatch(
            "encoder state does not cover the dataset's categorical columns".into(),
        ));
    }
    let mut out = data.clone();
    for ((idx, _), ec) in categorical.iter().zip(&state.columns) {
        let codes = match &data.columns[*idx] {
            Column::Categorical { vocab, ids } => {
                let per_vocab: Vec<i32> = vocab.iter().map(|t| ec.code(t)).collect();
                ids.iter()
                    .map(|id| id.map_or(state.reserved_code, |i| per_vocab[i as usize]))
                    .collect()
            }
            Column::Encoded(_) => {
                return Err(Error::ColumnMismatch(format!(
                    "{} is already encoded",
                    ec.name
                )))
            }
            Column::Numeric(_) => {
                return Err(Error::ColumnMismatch(format!("{} is numeric", ec.name)))
            }
        };
        out.columns[*idx] = Column::Encoded(codes);
    }
    Ok(out)
}

/// Replaces missing numeric cells with `fill` (scaled units).
pub fn replace_missing(data: &Dataset, fill: f64) -> Dataset {
    let mut out = data.clone();
    for col in &mut out.columns {
        if let Column::Numeric(values) = col {
            for x in values.iter_mut().filter(|x| x.is_nan()) {
                *x = fill;
            }
        }
    }
    out
}

/// How numeric missing cells reach the booster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Replace with a constant after scaling.
    Fill { value: f64 },
    /// Keep missing cells; splits learn a default direction.
    DefaultDirection,
}

impl Default for MissingPolicy {
    fn default() -> Self {
        MissingPolicy::Fill { value: 1.0 }
    }
}

/// Everything needed to replay the preparation on new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformState {
    pub version: u32,
    pub schema: FeatureSchema,
    pub scaler: ScalerState,
    pub encoder: EncoderState,
    pub missing: MissingPolicy,
}

impl TransformState {
    pub fn fit(train: &Dataset, missing: MissingPolicy) -> Result<Self> {
        Ok(Self {
            version: STATE_VERSION,
            schema: train.schema.clone(),
            scaler: fit_scaler(train)?,
            encoder: fit_encoder(train)?,
            missing,
        })
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.schema.columns != self.schema.columns {
            return Err(Error::ColumnMismatch(
                "dataset schema differs from the fitted schema".into(),
            ));
        }
        let scaled = apply_scaler(&self.scaler, data)?;
        let encoded = apply_encoder(&self.encoder, &scaled)?;
        Ok(match self.missing {
            MissingPolicy::Fill { value } => replace_missing(&encoded, value),
            MissingPolicy::DefaultDirection => encoded,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let state: TransformState = serde_json::from_str(s)?;
        if state.version != STATE_VERSION {
            return Err(Error::Serde(format!(
                "unsupported transform state version {}",
                state.version
            )));
        }
        state.schema.validate()?;
        Ok(state)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Cell, ColumnSpec};
    use proptest::prelude::*;

    fn numeric(values: Vec<f64>) -> Dataset {
        let n = values.len();
        let schema = FeatureSchema::new(vec![ColumnSpec::numeric("x")], "y", None).unwrap();
        Dataset::new(schema, vec![Column::Numeric(values)], vec![0; n], None).unwrap()
    }

    fn categorical(tokens: &[Option<&str>]) -> Dataset {
        let schema = FeatureSchema::new(vec![ColumnSpec::categorical("c")], "y", None).unwrap();
        let mut vocab: Vec<String> = Vec::new();
        let ids = tokens
            .iter()
            .map(|t| {
                t.map(|t| match vocab.iter().position(|v| v == t) {
                    Some(i) => i as u32,
                    None => {
                        vocab.push(t.to_string());
                        (vocab.len() - 1) as u32
                    }
                })
            })
            .collect();
        Dataset::new(
            schema,
            vec![Column::Categorical { vocab, ids }],
            vec![0; tokens.len()],
            None,
        )
        .unwrap()
    }

    fn values(d: &Dataset) -> Vec<f64> {
        match &d.columns[0] {
            Column::Numeric(v) => v.clone(),
            _ => panic!("not numeric"),
        }
    }

    fn codes(d: &Dataset) -> Vec<i32> {
        match &d.columns[0] {
            Column::Encoded(v) => v.clone(),
            _ => panic!("not encoded"),
        }
    }

    #[test]
    fn scaler_records_min_max() {
        let s = fit_scaler(&numeric(vec![2.0, 4.0, 10.0])).unwrap();
        assert_eq!((s.columns[0].min, s.columns[0].max), (2.0, 10.0));
        assert!(!s.columns[0].degenerate);

        let s = fit_scaler(&numeric(vec![-5.0, 5.0])).unwrap();
        assert_eq!((s.columns[0].min, s.columns[0].max), (-5.0, 5.0));
    }

    #[test]
    fn constant_column_is_degenerate_and_maps_to_zero() {
        let d = numeric(vec![7.0, 7.0]);
        let s = fit_scaler(&d).unwrap();
        assert_eq!((s.columns[0].min, s.columns[0].max), (7.0, 7.0));
        assert!(s.columns[0].degenerate);
        assert_eq!(values(&apply_scaler(&s, &d).unwrap()), vec![0.0, 0.0]);
    }

    #[test]
    fn all_missing_column_is_degenerate() {
        let d = numeric(vec![f64::NAN, f64::NAN]);
        let s = fit_scaler(&d).unwrap();
        assert!(s.columns[0].degenerate);
        let out = apply_scaler(&s, &numeric(vec![3.0, f64::NAN])).unwrap();
        let v = values(&out);
        assert_eq!(v[0], 0.0);
        assert!(v[1].is_nan());
    }

    #[test]
    fn scaling_clips_and_keeps_missing() {
        let s = fit_scaler(&numeric(vec![2.0, 4.0, 10.0])).unwrap();
        let out = apply_scaler(&s, &numeric(vec![2.0, 4.0, 10.0, 12.0, f64::NAN])).unwrap();
        let v = values(&out);
        assert_eq!(&v[..4], &[0.0, 0.25, 1.0, 1.0]);
        assert!(v[4].is_nan());
    }

    #[test]
    fn encoder_is_lexicographic() {
        let e = fit_encoder(&categorical(&[Some("B"), Some("A")])).unwrap();
        assert_eq!(e.columns[0].tokens, vec!["A", "B"]);
        let e = fit_encoder(&categorical(&[Some("X")])).unwrap();
        assert_eq!(e.columns[0].code("X"), 0);
        let e = fit_encoder(&categorical(&[Some("c"), Some("a"), Some("b")])).unwrap();
        assert_eq!(e.columns[0].tokens, vec!["a", "b", "c"]);
    }

    #[test]
    fn unseen_and_missing_tokens_get_reserved_code() {
        let e = fit_encoder(&categorical(&[Some("A"), Some("B")])).unwrap();
        let out = apply_encoder(&e, &categorical(&[Some("C"), Some("A"), None])).unwrap();
        assert_eq!(codes(&out), vec![-1, 0, -1]);
        assert_eq!(out.cell(0, 0), Cell::Code(-1));
    }

    #[test]
    fn replace_missing_fills_numeric_cells() {
        let d = numeric(vec![0.5, f64::NAN]);
        assert_eq!(values(&replace_missing(&d, 1.0)), vec![0.5, 1.0]);
        assert_eq!(values(&replace_missing(&d, 0.0)), vec![0.5, 0.0]);
        let full = numeric(vec![0.1, 0.2]);
        assert_eq!(replace_missing(&full, 1.0), full);
    }

    #[test]
    fn column_mismatch_is_an_error() {
        let s = fit_scaler(&numeric(vec![1.0, 2.0])).unwrap();
        let other = categorical(&[Some("a")]);
        assert!(matches!(apply_scaler(&s, &other), Err(Error::ColumnMismatch(_))));
        let e = fit_encoder(&categorical(&[Some("a")])).unwrap();
        assert!(matches!(
            apply_encoder(&e, &numeric(vec![1.0])),
            Err(Error::ColumnMismatch(_))
        ));
    }

    #[test]
    fn state_round_trips_through_json() {
        let d = numeric(vec![0.1, 0.7, 3.3]);
        let st = TransformState::fit(&d, MissingPolicy::default()).unwrap();
        let back = TransformState::from_json(&st.to_json().unwrap()).unwrap();
        assert_eq!(st, back);
    }

    proptest! {
        #[test]
        fn scaled_values_stay_in_unit_interval(
            train in prop::collection::vec(-1e6f64..1e6, 1..40),
            test in prop::collection::vec(-1e7f64..1e7, 1..40),
        ) {
            let s = fit_scaler(&numeric(train.clone())).unwrap();
            for x in values(&apply_scaler(&s, &numeric(test)).unwrap()) {
                prop_assert!((0.0..=1.0).contains(&x));
            }
            let own = values(&apply_scaler(&s, &numeric(train.clone())).unwrap());
            if !s.columns[0].degenerate {
                let lo = train.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = train.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for (x, y) in train.iter().zip(&own) {
                    if *x == lo { prop_assert_eq!(*y, 0.0); }
                    if *x == hi { prop_assert_eq!(*y, 1.0); }
                }
            }
        }

        #[test]
        fn encoding_training_tokens_never_yields_reserved(
            tokens in prop::collection::vec("[a-e]{1,2}", 1..30)
        ) {
            let toks: Vec<Option<&str>> = tokens.iter().map(|t| Some(t.as_str())).collect();
            let d = categorical(&toks);
            let e = fit_encoder(&d).unwrap();
            let c = codes(&apply_encoder(&e, &d).unwrap());
            prop_assert!(c.iter().all(|&x| x >= 0));
            let k = e.columns[0].tokens.len() as i32;
            prop_assert!(c.iter().all(|&x| x < k));
        }
    }
}
