use rand::seq::index::sample;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{seeded, streams};

/// Rows with `time < split_point` train, the rest test; order is preserved.
pub fn time_split(data: &Dataset, split_point: i64) -> Result<(Dataset, Dataset)> {
    let times = data.time_index.as_ref().ok_or(Error::MissingTimeIndex)?;
    let cut = times.partition_point(|&t| t < split_point);
    if cut == 0 {
        return Err(Error::EmptyPartition("train"));
    }
    if cut == times.len() {
        return Err(Error::EmptyPartition("test"));
    }
    Ok((data.slice(0..cut), data.slice(cut..data.n_rows())))
}

/// Splits at the time value found at position `floor(n * train_fraction)`.
pub fn time_split_fraction(data: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    let times = data.time_index.as_ref().ok_or(Error::MissingTimeIndex)?;
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    let pos = ((times.len() as f64) * train_fraction).floor() as usize;
    let point = *times.get(pos).ok_or(Error::EmptyPartition("test"))?;
    time_split(data, point)
}

/// Exactly `size` rows with `round(size * pos_fraction)` positives, drawn
/// without replacement per class; rows keep their original relative order.
pub fn stratified_subset(
    data: &Dataset,
    size: usize,
    pos_fraction: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&pos_fraction) {
        return Err(Error::InvalidParameter(format!(
            "positive fraction {pos_fraction} not in [0, 1]"
        )));
    }
    let n_pos = (size as f64 * pos_fraction).round() as usize;
    let n_neg = size - n_pos;
    let (pos, neg) = data.class_indices();
    if pos.len() < n_pos {
        return Err(Error::InsufficientRows {
            class: "positive",
            needed: n_pos,
            available: pos.len(),
        });
    }
    if neg.len() < n_neg {
        return Err(Error::InsufficientRows {
            class: "negative",
            needed: n_neg,
            available: neg.len(),
        });
    }
    let mut rng = seeded(seed, streams::SUBSET);
    let mut rows: Vec<usize> = sample(&mut rng, pos.len(), n_pos)
        .into_iter()
        .map(|i| pos[i])
        .chain(sample(&mut rng, neg.len(), n_neg).into_iter().map(|i| neg[i]))
        .collect();
    rows.sort_unstable();
    Ok(data.take(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, ColumnSpec, FeatureSchema};
    use proptest::prelude::*;

    fn stream(n: usize, pos_every: usize) -> Dataset {
        let schema =
            FeatureSchema::new(vec![ColumnSpec::numeric("x")], "y", Some("t".into())).unwrap();
        Dataset::new(
            schema,
            vec![Column::Numeric((0..n).map(|i| i as f64).collect())],
            (0..n).map(|i| u8::from(i % pos_every == 0)).collect(),
            Some((0..n as i64).collect()),
        )
        .unwrap()
    }

    #[test]
    fn split_at_row_eight() {
        let (tr, te) = time_split(&stream(10, 2), 8).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (8, 2));
    }

    #[test]
    fn split_at_minimum_is_empty_train() {
        let err = time_split(&stream(10, 2), 0).unwrap_err();
        assert!(err.to_string().contains("empty train"));
        assert!(matches!(
            time_split(&stream(10, 2), 100),
            Err(Error::EmptyPartition("test"))
        ));
    }

    #[test]
    fn eighty_twenty() {
        let (tr, te) = time_split_fraction(&stream(10_000, 3), 0.8).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (8000, 2000));
    }

    #[test]
    fn split_needs_time_index() {
        let mut d = stream(10, 2);
        d.time_index = None;
        assert!(matches!(time_split(&d, 3), Err(Error::MissingTimeIndex)));
    }

    #[test]
    fn subset_class_counts() {
        let d = stream(20_000, 2);
        let s = stratified_subset(&d, 1000, 0.05, 7).unwrap();
        assert_eq!((s.n_positives(), s.n_negatives()), (50, 950));
        let s = stratified_subset(&d, 10_000, 0.45, 7).unwrap();
        assert_eq!(s.n_positives(), 4500);
        let t = s.time_index.unwrap();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn subset_too_many_positives() {
        let d = stream(100, 10);
        assert!(matches!(
            stratified_subset(&d, 50, 0.5, 1),
            Err(Error::InsufficientRows { class: "positive", .. })
        ));
    }

    proptest! {
        #[test]
        fn split_partitions(n in 2usize..200, cut in 1i64..199) {
            prop_assume!((cut as usize) < n);
            let d = stream(n, 3);
            let (tr, te) = time_split(&d, cut).unwrap();
            prop_assert_eq!(tr.n_rows() + te.n_rows(), n);
            let max_tr = *tr.time_index.unwrap().last().unwrap();
            let min_te = te.time_index.unwrap()[0];
            prop_assert!(max_tr < min_te);
        }

        #[test]
        fn subset_reproducible(seed in any::<u64>(), size in 10usize..300, frac in 0.0f64..0.5) {
            let d = stream(1200, 2);
            let a = stratified_subset(&d, size, frac, seed).unwrap();
            let b = stratified_subset(&d, size, frac, seed).unwrap();
            prop_assert_eq!(a.n_positives(), (size as f64 * frac).round() as usize);
            prop_assert_eq!(a.n_rows(), size);
            prop_assert_eq!(a, b);
        }
    }
}
