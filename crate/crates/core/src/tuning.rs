//! Stratified k-fold cross-validation and random search over finite grids.
//!
//! Trials are selected by mean validation AUC-PR; F1 at threshold 0.5 is
//! recorded alongside for reporting. Standard deviations use the population
//! formula over folds.

use std::fmt::{self, Write as _};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, MissingPolicy, TransformState};
use crate::error::{Error, Result};
use crate::gbt::{self, Ensemble, TrainConfig};
use crate::metrics;
use crate::rng::{seeded, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    MaxDepth,
    LearningRate,
    Subsample,
    ColsampleBytree,
    NTrees,
    ScalePosWeight,
    WeightedAlpha,
    FocalGamma,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::MaxDepth => "max_depth",
            Param::LearningRate => "learning_rate",
            Param::Subsample => "subsample",
            Param::ColsampleBytree => "colsample_bytree",
            Param::NTrees => "n_trees",
            Param::ScalePosWeight => "scale_pos_weight",
            Param::WeightedAlpha => "weighted_alpha",
            Param::FocalGamma => "focal_gamma",
        }
    }

    pub fn apply(self, config: &mut TrainConfig, value: f64) {
        match self {
            Param::MaxDepth => config.max_depth = value as usize,
            Param::LearningRate => config.learning_rate = value,
            Param::Subsample => config.subsample = value,
            Param::ColsampleBytree => config.colsample_bytree = value,
            Param::NTrees => config.n_trees = value as usize,
            Param::ScalePosWeight => config.objective.scale_pos_weight = value,
            Param::WeightedAlpha => config.objective.weighted_alpha = Some(value),
            Param::FocalGamma => config.objective.focal_gamma = Some(value),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cross product of per-parameter value lists. The first parameter varies
/// slowest when configurations are enumerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<(Param, Vec<f64>)>,
}

impl SearchSpace {
    pub fn new(params: Vec<(Param, Vec<f64>)>) -> Result<Self> {
        let space = Self { params };
        space.validate()?;
        Ok(space)
    }

    /// Depth, learning rate, row and column subsampling and tree count.
    pub fn rs_grid() -> Self {
        Self {
            params: vec![
                (Param::MaxDepth, vec![3.0, 6.0, 12.0, 20.0]),
                (Param::LearningRate, vec![0.02, 0.1, 0.2]),
                (Param::Subsample, vec![0.4, 0.8, 1.0]),
                (Param::ColsampleBytree, vec![0.4, 0.6, 1.0]),
                (Param::NTrees, vec![100.0, 1000.0, 5000.0]),
            ],
        }
    }

    /// Positive-class weights matching 50/50, 75/25, 95/5 and steeper ratios.
    pub fn scale_grid() -> Self {
        Self {
            params: vec![(
                Param::ScalePosWeight,
                vec![1.0, 3.0, 19.0, 100.0, 1000.0, 1900.0],
            )],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::InvalidParameter("search space has no parameters".into()));
        }
        for (p, values) in &self.params {
            if values.is_empty() {
                return Err(Error::InvalidParameter(format!("no values for {p}")));
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.params.iter().map(|(_, v)| v.len()).product()
    }

    /// Parameter assignment of configuration `index` in enumeration order.
    pub fn assignment(&self, mut index: usize) -> Vec<(Param, f64)> {
        let mut out = vec![(Param::MaxDepth, 0.0); self.params.len()];
        for (slot, (p, values)) in self.params.iter().enumerate().rev() {
            out[slot] = (*p, values[index % values.len()]);
            index /= values.len();
        }
        out
    }

    pub fn config(&self, base: &TrainConfig, index: usize) -> TrainConfig {
        let mut c = *base;
        for (p, v) in self.assignment(index) {
            p.apply(&mut c, v);
        }
        c
    }
}

/// How raw folds become model input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Preprocess {
    /// Data is already scaled and encoded.
    None,
    /// Fit scaler and encoder on each training split, then apply to both sides.
    Fit(MissingPolicy),
}

/// Row indices of `k` disjoint folds covering the dataset.
///
/// Rows are shuffled and dealt round-robin; with `stratified` each class is
/// dealt in turn, so every fold holds its share of positives to within one row.
pub fn kfold_split(data: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if data.n_rows() < k {
        return Err(Error::InsufficientRows {
            class: "total",
            needed: k,
            available: data.n_rows(),
        });
    }
    let mut rng = seeded(seed, streams::FOLDS);
    let groups = if stratified {
        let (pos, neg) = data.class_indices();
        for (class, rows) in [("positive", &pos), ("negative", &neg)] {
            if rows.len() < k {
                return Err(Error::InsufficientRows {
                    class,
                    needed: k,
                    available: rows.len(),
                });
            }
        }
        vec![pos, neg]
    } else {
        vec![(0..data.n_rows()).collect()]
    };
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut rows in groups {
        rows.shuffle(&mut rng);
        for r in rows {
            folds[next].push(r);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Training and validation sets of fold `i`, with preprocessing fit on the
/// training side only.
pub fn prepare_fold(
    data: &Dataset,
    folds: &[Vec<usize>],
    i: usize,
    preprocess: Preprocess,
) -> Result<(Dataset, Dataset, Option<TransformState>)> {
    let mut train_rows: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .flat_map(|(_, f)| f.iter().copied())
        .collect();
    train_rows.sort_unstable();
    let train = data.take(&train_rows);
    let valid = data.take(&folds[i]);
    match preprocess {
        Preprocess::None => Ok((train, valid, None)),
        Preprocess::Fit(policy) => {
            let state = TransformState::fit(&train, policy)?;
            Ok((state.apply(&train)?, state.apply(&valid)?, Some(state)))
        }
    }
}

/// Population mean and standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `"0.59 (0.03)"`.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.2} ({std:.2})")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub auc_pr: Vec<f64>,
    pub f1: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

impl FoldScores {
    pub fn auc_pr_mean_std(&self) -> (f64, f64) {
        mean_std(&self.auc_pr)
    }

    pub fn f1_mean_std(&self) -> (f64, f64) {
        mean_std(&self.f1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    auc_pr: f64,
    f1: f64,
    precision: f64,
    recall: f64,
}

/// Precision and recall at threshold 0.5, undefined values scored as 0.
fn score_fold(train: &Dataset, valid: &Dataset, config: &TrainConfig) -> Result<Score> {
    let model = gbt::fit(train, config, None)?;
    let proba = model.predict_proba(valid)?;
    let pred = metrics::threshold_labels(&proba, 0.5);
    let report = metrics::report(&metrics::confusion(&valid.labels, &pred)?);
    Ok(Score {
        auc_pr: metrics::auc_pr(&valid.labels, &proba)?,
        f1: report.f1.unwrap_or(0.0),
        precision: report.precision.unwrap_or(0.0),
        recall: report.recall.unwrap_or(0.0),
    })
}

fn collect_scores(scores: Vec<Score>) -> FoldScores {
    FoldScores {
        auc_pr: scores.iter().map(|s| s.auc_pr).collect(),
        f1: scores.iter().map(|s| s.f1).collect(),
        precision: scores.iter().map(|s| s.precision).collect(),
        recall: scores.iter().map(|s| s.recall).collect(),
    }
}

/// Stratified k-fold scores of one configuration.
pub fn cross_validate(
    data: &Dataset,
    config: &TrainConfig,
    k: usize,
    seed: u64,
    preprocess: Preprocess,
) -> Result<FoldScores> {
    let folds = kfold_split(data, k, seed, true)?;
    let prepared = (0..k)
        .map(|i| prepare_fold(data, &folds, i, preprocess))
        .collect::<Result<Vec<_>>>()?;
    let scores = prepared
        .par_iter()
        .map(|(train, valid, _)| score_fold(train, valid, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_scores(scores))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub assignment: Vec<(Param, f64)>,
    pub config: TrainConfig,
    pub scores: FoldScores,
    pub mean_auc_pr: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub trials: Vec<Trial>,
}

impl CvResult {
    /// Highest mean AUC-PR; the earliest trial wins ties.
    pub fn winner(&self) -> Result<&Trial> {
        let mut best: Option<&Trial> = None;
        for t in &self.trials {
            if best.is_none_or(|b| t.mean_auc_pr > b.mean_auc_pr) {
                best = Some(t);
            }
        }
        best.ok_or(Error::NoWinner)
    }

    /// `trial,<params>,fold_<i>_auc_pr...,fold_<i>_f1...,mean_auc_pr,std_auc_pr,mean_f1,std_f1`
    pub fn trial_log_csv(&self) -> String {
        let mut s = String::from("trial");
        if let Some(first) = self.trials.first() {
            for (p, _) in &first.assignment {
                let _ = write!(s, ",{p}");
            }
        }
        for i in 0..self.k {
            let _ = write!(s, ",fold_{i}_auc_pr");
        }
        for i in 0..self.k {
            let _ = write!(s, ",fold_{i}_f1");
        }
        s.push_str(",mean_auc_pr,std_auc_pr,mean_f1,std_f1\n");
        for t in &self.trials {
            let _ = write!(s, "{}", t.index);
            for (_, v) in &t.assignment {
                let _ = write!(s, ",{v}");
            }
            for x in t.scores.auc_pr.iter().chain(&t.scores.f1) {
                let _ = write!(s, ",{x}");
            }
            let (m, sd) = t.scores.auc_pr_mean_std();
            let _ = writeln!(s, ",{m},{sd},{},{}", t.mean_f1, t.std_f1);
        }
        s
    }
}

/// Evaluates `n_trials` distinct configurations drawn uniformly from `space`
/// with k-fold CV. Asking for the whole space runs it in enumeration order,
/// which is plain grid search.
pub fn random_search(
    data: &Dataset,
    space: &SearchSpace,
    base: &TrainConfig,
    n_trials: usize,
    k: usize,
    seed: u64,
    preprocess: Preprocess,
) -> Result<CvResult> {
    space.validate()?;
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be at least 1".into()));
    }
    let size = space.size();
    if n_trials > size {
        return Err(Error::TooManyTrials {
            requested: n_trials,
            available: size,
        });
    }
    let picks: Vec<usize> = if n_trials == size {
        (0..size).collect()
    } else {
        sample(&mut seeded(seed, streams::SEARCH), size, n_trials).into_vec()
    };
    let configs: Vec<TrainConfig> = picks.iter().map(|&i| space.config(base, i)).collect();
    for c in &configs {
        c.validate()?;
    }

    let folds = kfold_split(data, k, seed, true)?;
    let prepared = (0..k)
        .map(|i| prepare_fold(data, &folds, i, preprocess))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..configs.len()).flat_map(|t| (0..k).map(move |f| (t, f))).collect();
    let scores = jobs
        .par_iter()
        .map(|&(t, f)| score_fold(&prepared[f].0, &prepared[f].1, &configs[t]))
        .collect::<Result<Vec<_>>>()?;

    let trials = scores
        .chunks(k)
        .zip(picks.iter().zip(configs))
        .enumerate()
        .map(|(index, (chunk, (&pick, config)))| {
            let scores = collect_scores(chunk.to_vec());
            let (mean_f1, std_f1) = scores.f1_mean_std();
            Trial {
                index,
                assignment: space.assignment(pick),
                config,
                mean_auc_pr: scores.auc_pr_mean_std().0,
                mean_f1,
                std_f1,
                scores,
            }
        })
        .collect();
    Ok(CvResult { k, trials })
}

/// Winning configuration refit on all of `data`, plus the transform fitted
/// for it when preprocessing is requested.
pub fn fit_best(data: &Dataset, result: &CvResult, preprocess: Preprocess) -> Result<(Ensemble, Option<TransformState>)> {
    let winner = result.winner()?;
    match preprocess {
        Preprocess::None => Ok((gbt::fit(data, &winner.config, None)?, None)),
        Preprocess::Fit(policy) => {
            let state = TransformState::fit(data, policy)?;
            let model = gbt::fit(&state.apply(data)?, &winner.config, None)?;
            Ok((model, Some(state)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, ColumnSpec, FeatureSchema};
    use proptest::prelude::*;

    fn labelled(n: usize, n_pos: usize) -> Dataset {
        let schema = FeatureSchema::new(vec![ColumnSpec::numeric("x")], "y", None).unwrap();
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i < n_pos)).collect();
        let x: Vec<f64> = (0..n).map(|i| if i < n_pos { 1.0 } else { 0.0 } + (i % 7) as f64 * 0.01).collect();
        Dataset::new(schema, vec![Column::Numeric(x)], labels, None).unwrap()
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(SearchSpace::rs_grid().size(), 324);
        assert_eq!(SearchSpace::scale_grid().size(), 6);
        let s = SearchSpace::scale_grid();
        let weights: Vec<f64> = (0..6).map(|i| s.config(&TrainConfig::default(), i).objective.scale_pos_weight).collect();
        assert_eq!(weights, vec![1.0, 3.0, 19.0, 100.0, 1000.0, 1900.0]);
        assert_eq!(1900, 95 * 100 / 5);
    }

    #[test]
    fn enumeration_covers_the_grid() {
        let s = SearchSpace::rs_grid();
        let mut seen: Vec<Vec<u64>> = (0..s.size())
            .map(|i| s.assignment(i).iter().map(|(_, v)| v.to_bits()).collect())
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 324);
    }

    #[test]
    fn folds_of_equal_size() {
        let d = labelled(1000, 100);
        let folds = kfold_split(&d, 5, 3, true).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 200);
            let pos = f.iter().filter(|&&r| d.labels[r] == 1).count();
            assert!((19..=21).contains(&pos), "{pos}");
        }
    }

    #[test]
    fn kfold_errors() {
        let d = labelled(10, 2);
        assert!(kfold_split(&d, 1, 0, true).is_err());
        assert!(matches!(kfold_split(&d, 3, 0, true), Err(Error::InsufficientRows { .. })));
        assert!(kfold_split(&d, 3, 0, false).is_ok());
        assert!(kfold_split(&d, 11, 0, false).is_err());
    }

    #[test]
    fn too_many_trials() {
        let d = labelled(100, 30);
        let err = random_search(&d, &SearchSpace::rs_grid(), &TrainConfig::default(), 325, 2, 0, Preprocess::None);
        assert!(matches!(err, Err(Error::TooManyTrials { requested: 325, available: 324 })));
    }

    #[test]
    fn empty_log_has_no_winner() {
        let r = CvResult { k: 5, trials: vec![] };
        assert!(matches!(r.winner(), Err(Error::NoWinner)));
        assert!(matches!(fit_best(&labelled(10, 5), &r, Preprocess::None), Err(Error::NoWinner)));
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
        assert_eq!(format_mean_std(0.594, 0.0349), "0.59 (0.03)");
    }

    proptest! {
        #[test]
        fn folds_partition_rows(n in 10usize..200, k in 2usize..6, seed: u64, strat: bool) {
            let d = labelled(n, n / 3);
            prop_assume!(!strat || (n / 3 >= k && n - n / 3 >= k));
            let folds = kfold_split(&d, k, seed, strat).unwrap();
            prop_assert_eq!(folds.len(), k);
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
