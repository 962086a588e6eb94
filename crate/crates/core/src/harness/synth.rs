//! Synthetic imbalanced tabular data with controllable difficulty.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnSpec, Dataset, FeatureSchema};
use crate::error::{Error, Result};
use crate::rng::{seeded, streams};

/// Distribution change from row `onset` on: every numeric feature mean moves
/// by `shift` noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub onset: usize,
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub n_numeric: usize,
    pub n_categorical: usize,
    pub pos_fraction: f64,
    /// Distance between the class means in noise standard deviations.
    pub class_separation: f64,
    pub missing_rate: f64,
    pub drift: Option<Drift>,
    pub seed: u64,
}

/// Tokens per categorical column.
pub const VOCAB_SIZE: usize = 6;

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_rows: 10_000,
            n_numeric: 8,
            n_categorical: 2,
            pos_fraction: 0.5,
            class_separation: 2.0,
            missing_rate: 0.0,
            drift: None,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_numeric + self.n_categorical == 0 {
            return Err(Error::InvalidParameter("synthetic data needs at least one feature".into()));
        }
        for (name, r) in [("pos_fraction", self.pos_fraction), ("missing_rate", self.missing_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidParameter(format!("{name} must be in [0, 1], got {r}")));
            }
        }
        if !(self.class_separation >= 0.0 && self.class_separation.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "class separation must be non-negative, got {}",
                self.class_separation
            )));
        }
        Ok(())
    }

    pub fn schema(&self) -> FeatureSchema {
        let columns = (0..self.n_numeric)
            .map(|j| ColumnSpec::numeric(format!("num{j}")))
            .chain((0..self.n_categorical).map(|j| ColumnSpec::categorical(format!("cat{j}"))))
            .collect();
        FeatureSchema {
            columns,
            label_column: "label".into(),
            time_column: Some("time".into()),
        }
    }
}

/// Generates `spec.n_rows` rows with exactly `round(n_rows * pos_fraction)`
/// positives at random positions in time.
///
/// Numeric features are Gaussian with unit noise; positives have their mean
/// raised on every numeric feature so that the class means sit
/// `class_separation` apart. Each feature is then given its own offset and
/// scale. Categorical features draw uniformly for negatives, while positives
/// favour a per-column token with a probability that grows with the separation.
pub fn synth_generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_rows;
    let mut rng = seeded(spec.seed, streams::SYNTH);

    let n_pos = (n as f64 * spec.pos_fraction).round() as usize;
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < n_pos)).collect();
    labels.shuffle(&mut rng);

    let offset = if spec.n_numeric > 0 {
        spec.class_separation / (spec.n_numeric as f64).sqrt()
    } else {
        0.0
    };
    let mut columns = Vec::with_capacity(spec.n_numeric + spec.n_categorical);
    for _ in 0..spec.n_numeric {
        let centre: f64 = rng.random_range(-5.0..5.0);
        let scale: f64 = rng.random_range(0.5..10.0);
        let values = labels
            .iter()
            .enumerate()
            .map(|(r, &y)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let drift = spec.drift.filter(|d| r >= d.onset).map_or(0.0, |d| d.shift);
                let x = centre + scale * (z + f64::from(y) * offset + drift);
                if rng.random::<f64>() < spec.missing_rate {
                    f64::NAN
                } else {
                    x
                }
            })
            .collect();
        columns.push(Column::Numeric(values));
    }

    let skew = spec.class_separation / (spec.class_separation + 2.0);
    for _ in 0..spec.n_categorical {
        let favoured = rng.random_range(0..VOCAB_SIZE) as u32;
        let ids = labels
            .iter()
            .map(|&y| {
                let token = if y == 1 && rng.random::<f64>() < skew {
                    favoured
                } else {
                    rng.random_range(0..VOCAB_SIZE) as u32
                };
                (rng.random::<f64>() >= spec.missing_rate).then_some(token)
            })
            .collect();
        columns.push(Column::Categorical {
            vocab: (0..VOCAB_SIZE).map(|k| format!("t{k}")).collect(),
            ids,
        });
    }

    Dataset::new(spec.schema(), columns, labels, Some((0..n as i64).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_positive_count() {
        let d = synth_generate(&SynthSpec {
            pos_fraction: 0.05,
            ..SynthSpec::default()
        })
        .unwrap();
        assert_eq!(d.n_rows(), 10_000);
        assert_eq!(d.n_positives(), 500);
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec {
            n_rows: 500,
            missing_rate: 0.1,
            seed: 9,
            ..SynthSpec::default()
        };
        let a = synth_generate(&spec).unwrap();
        let b = synth_generate(&spec).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert!(a.missing_count() > 0);
    }

    #[test]
    fn drift_moves_the_mean() {
        let spec = SynthSpec {
            n_rows: 4000,
            n_numeric: 1,
            n_categorical: 0,
            class_separation: 0.0,
            drift: Some(Drift { onset: 2000, shift: 3.0 }),
            ..SynthSpec::default()
        };
        let d = synth_generate(&spec).unwrap();
        let Column::Numeric(x) = &d.columns[0] else { unreachable!() };
        let before = x[..2000].iter().sum::<f64>() / 2000.0;
        let after = x[2000..].iter().sum::<f64>() / 2000.0;
        assert!((after - before).abs() > 1.0);
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            SynthSpec { n_numeric: 0, n_categorical: 0, ..SynthSpec::default() },
            SynthSpec { pos_fraction: 1.5, ..SynthSpec::default() },
            SynthSpec { missing_rate: -0.1, ..SynthSpec::default() },
            SynthSpec { class_separation: -1.0, ..SynthSpec::default() },
        ] {
            assert!(synth_generate(&spec).is_err());
        }
    }
}
