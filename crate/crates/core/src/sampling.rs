//! Class rebalancing with real rows only.
//!
//! Under-sampling drops majority rows uniformly without replacement;
//! over-sampling duplicates minority rows uniformly with replacement. Every
//! output row is a copy of an input row. Outputs list rows in their original
//! order (copies adjacent), so time order survives resampling.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{seeded, streams, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Under,
    Over,
    CombinedPreserveSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub strategy: Strategy,
    pub target_pos_fraction: f64,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        Self {
            strategy,
            target_pos_fraction: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_pos_fraction > 0.0 && self.target_pos_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target positive fraction must be in (0, 1), got {}",
                self.target_pos_fraction
            )));
        }
        Ok(())
    }
}

/// A resampled dataset plus the number of times each input row was kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub data: Dataset,
    pub multiplicity: Vec<u32>,
}

impl Resampled {
    /// Audit log as CSV: `row,multiplicity`, one line per input row.
    pub fn audit_csv(&self) -> String {
        let mut s = String::from("row,multiplicity\n");
        for (row, m) in self.multiplicity.iter().enumerate() {
            let _ = writeln!(s, "{row},{m}");
        }
        s
    }
}

pub fn resample(train: &Dataset, plan: &SamplingPlan) -> Result<Resampled> {
    match plan.strategy {
        Strategy::Under => random_under_sample(train, plan),
        Strategy::Over => random_over_sample(train, plan),
        Strategy::CombinedPreserveSize => balance_preserve_size(train, plan),
    }
}

fn classes(train: &Dataset, plan: &SamplingPlan) -> Result<(Vec<usize>, Vec<usize>)> {
    plan.validate()?;
    let (pos, neg) = train.class_indices();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Sets `multiplicity` for one class so that it holds `target` rows: a subset
/// without replacement when shrinking, all rows plus uniform duplicates when
/// growing.
fn fill_class(rows: &[usize], target: usize, multiplicity: &mut [u32], under: &mut Rng, over: &mut Rng) {
    if target <= rows.len() {
        for i in sample(under, rows.len(), target) {
            multiplicity[rows[i]] += 1;
        }
    } else {
        for &r in rows {
            multiplicity[r] += 1;
        }
        for _ in rows.len()..target {
            multiplicity[rows[over.random_range(0..rows.len())]] += 1;
        }
    }
}

fn build(train: &Dataset, multiplicity: Vec<u32>) -> Resampled {
    let rows: Vec<usize> = multiplicity
        .iter()
        .enumerate()
        .flat_map(|(r, &m)| std::iter::repeat_n(r, m as usize))
        .collect();
    Resampled {
        data: train.take(&rows),
        multiplicity,
    }
}

fn resample_to(train: &Dataset, plan: &SamplingPlan, pos: &[usize], neg: &[usize], n_pos: usize, n_neg: usize) -> Result<Resampled> {
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParameter(format!(
            "target positive fraction {} empties a class",
            plan.target_pos_fraction
        )));
    }
    let mut under = seeded(plan.seed, streams::UNDER);
    let mut over = seeded(plan.seed, streams::OVER);
    let mut multiplicity = vec![0u32; train.n_rows()];
    fill_class(pos, n_pos, &mut multiplicity, &mut under, &mut over);
    fill_class(neg, n_neg, &mut multiplicity, &mut under, &mut over);
    Ok(build(train, multiplicity))
}

/// Count of the other class that puts `count` at fraction `frac` of the total.
fn partner(count: usize, frac: f64) -> usize {
    (count as f64 * (1.0 - frac) / frac).round() as usize
}

/// Shrinks the over-represented class until the target fraction holds.
pub fn random_under_sample(train: &Dataset, plan: &SamplingPlan) -> Result<Resampled> {
    let (pos, neg) = classes(train, plan)?;
    let t = plan.target_pos_fraction;
    let (n_pos, n_neg) = if (pos.len() as f64) < t * train.n_rows() as f64 {
        (pos.len(), partner(pos.len(), t).min(neg.len()))
    } else {
        (partner(neg.len(), 1.0 - t).min(pos.len()), neg.len())
    };
    resample_to(train, plan, &pos, &neg, n_pos, n_neg)
}

/// Duplicates rows of the under-represented class until the target holds.
pub fn random_over_sample(train: &Dataset, plan: &SamplingPlan) -> Result<Resampled> {
    let (pos, neg) = classes(train, plan)?;
    let t = plan.target_pos_fraction;
    let (n_pos, n_neg) = if (pos.len() as f64) < t * train.n_rows() as f64 {
        (partner(neg.len(), 1.0 - t).max(pos.len()), neg.len())
    } else {
        (pos.len(), partner(pos.len(), t).max(neg.len()))
    };
    resample_to(train, plan, &pos, &neg, n_pos, n_neg)
}

/// Keeps the row count and moves to `round(n * target)` positives by
/// under-sampling one class and over-sampling the other at the same time.
pub fn balance_preserve_size(train: &Dataset, plan: &SamplingPlan) -> Result<Resampled> {
    let (pos, neg) = classes(train, plan)?;
    let n = train.n_rows();
    let n_pos = (n as f64 * plan.target_pos_fraction).round() as usize;
    resample_to(train, plan, &pos, &neg, n_pos, n - n_pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, ColumnSpec, FeatureSchema};
    use proptest::prelude::*;
    use super::Strategy;

    fn labelled(n_neg: usize, n_pos: usize) -> Dataset {
        let schema = FeatureSchema::new(vec![ColumnSpec::numeric("x")], "y", Some("t".into())).unwrap();
        let n = n_neg + n_pos;
        // positives spread through the stream
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i * n_pos / n != (i + 1) * n_pos / n)).collect();
        Dataset::new(
            schema,
            vec![Column::Numeric((0..n).map(|i| i as f64 * 0.5).collect())],
            labels,
            Some((0..n as i64).collect()),
        )
        .unwrap()
    }

    fn counts(d: &Dataset) -> (usize, usize) {
        (d.n_negatives(), d.n_positives())
    }

    #[test]
    fn under_sampling_to_balance() {
        let d = labelled(900, 100);
        let r = random_under_sample(&d, &SamplingPlan::new(Strategy::Under, 1)).unwrap();
        assert_eq!(counts(&r.data), (100, 100));
        let d = labelled(550, 450);
        let r = random_under_sample(&d, &SamplingPlan::new(Strategy::Under, 1)).unwrap();
        assert_eq!(counts(&r.data), (450, 450));
    }

    #[test]
    fn over_sampling_to_balance() {
        let d = labelled(900, 100);
        let r = random_over_sample(&d, &SamplingPlan::new(Strategy::Over, 1)).unwrap();
        assert_eq!(counts(&r.data), (900, 900));
        let dup: u32 = r.multiplicity.iter().map(|&m| m.saturating_sub(1)).sum();
        assert_eq!(dup, 800);
    }

    #[test]
    fn combined_keeps_size() {
        let d = labelled(900, 100);
        let r = balance_preserve_size(&d, &SamplingPlan::new(Strategy::CombinedPreserveSize, 1)).unwrap();
        assert_eq!(counts(&r.data), (500, 500));
        let d = labelled(550, 450);
        let r = balance_preserve_size(&d, &SamplingPlan::new(Strategy::CombinedPreserveSize, 1)).unwrap();
        assert_eq!(counts(&r.data), (500, 500));
        let dup: u32 = r.multiplicity.iter().map(|&m| m.saturating_sub(1)).sum();
        assert_eq!(dup, 50);
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let d = labelled(500, 500);
        for s in [Strategy::Under, Strategy::Over, Strategy::CombinedPreserveSize] {
            let r = resample(&d, &SamplingPlan::new(s, 3)).unwrap();
            assert_eq!(r.data, d, "{s:?}");
        }
    }

    #[test]
    fn rejects_single_class_and_bad_target() {
        let d = labelled(10, 0);
        assert!(matches!(
            resample(&d, &SamplingPlan::new(Strategy::Over, 0)),
            Err(Error::SingleClass)
        ));
        let d = labelled(10, 10);
        let plan = SamplingPlan {
            target_pos_fraction: 1.0,
            ..SamplingPlan::new(Strategy::Under, 0)
        };
        assert!(resample(&d, &plan).is_err());
    }

    #[test]
    fn audit_lists_every_input_row() {
        let d = labelled(9, 1);
        let r = random_over_sample(&d, &SamplingPlan::new(Strategy::Over, 0)).unwrap();
        let csv = r.audit_csv();
        assert_eq!(csv.lines().count(), 11);
        let pos_row = d.labels.iter().position(|&l| l == 1).unwrap();
        assert!(csv.contains(&format!("\n{pos_row},9\n")));
    }

    proptest! {
        #[test]
        fn rows_are_real_and_size_is_preserved(
            n_neg in 1usize..300, n_pos in 1usize..300, t in 0.05f64..0.95, seed: u64,
        ) {
            let d = labelled(n_neg, n_pos);
            let plan = SamplingPlan { strategy: Strategy::CombinedPreserveSize, target_pos_fraction: t, seed };
            let n = d.n_rows();
            let want_pos = (n as f64 * t).round() as usize;
            prop_assume!(want_pos > 0 && want_pos < n);
            let r = balance_preserve_size(&d, &plan).unwrap();
            prop_assert_eq!(r.data.n_rows(), n);
            prop_assert_eq!(r.data.n_positives(), want_pos);
            // every output row matches an input row; the time index identifies it
            let times = r.data.time_index.as_ref().unwrap();
            for (i, &tm) in times.iter().enumerate() {
                let src = tm as usize;
                prop_assert_eq!(r.data.labels[i], d.labels[src]);
                prop_assert_eq!(r.data.cell(i, 0), d.cell(src, 0));
            }
            prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(balance_preserve_size(&d, &plan).unwrap(), r);
        }

        #[test]
        fn under_and_over_hit_the_target(n_neg in 1usize..300, n_pos in 1usize..300, seed: u64) {
            let d = labelled(n_neg, n_pos);
            let under = random_under_sample(&d, &SamplingPlan::new(Strategy::Under, seed)).unwrap();
            let m = n_neg.min(n_pos);
            prop_assert_eq!(counts(&under.data), (m, m));
            prop_assert!(under.multiplicity.iter().all(|&k| k <= 1));
            let over = random_over_sample(&d, &SamplingPlan::new(Strategy::Over, seed)).unwrap();
            let m = n_neg.max(n_pos);
            prop_assert_eq!(counts(&over.data), (m, m));
            prop_assert!(over.multiplicity.iter().all(|&k| k >= 1));
        }
    }
}
