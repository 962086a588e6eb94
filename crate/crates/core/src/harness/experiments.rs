//! Experiment protocols: size by class-ratio grid, sampling to balance,
//! imbalance-aware objectives and time drift.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{ttest_unpaired, TTest};
use crate::data::{stratified_subset, time_split_fraction, write_csv, Dataset, MissingPolicy, TransformState};
use crate::error::{Error, Result};
use crate::gbt::{self, Objective, TrainConfig};
use crate::metrics::{self, PrCurve};
use crate::rng::derive_seed;
use crate::sampling::{balance_preserve_size, SamplingPlan, Strategy};
use crate::tuning::{cross_validate, fit_best, mean_std, random_search, Preprocess, SearchSpace};

/// Search space, trial budget and fold count of a tuning step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneSpec {
    pub space: SearchSpace,
    pub n_trials: usize,
    pub k: usize,
}

impl TuneSpec {
    pub fn rs(n_trials: usize, k: usize) -> Self {
        Self {
            space: SearchSpace::rs_grid(),
            n_trials,
            k,
        }
    }

    pub fn scale(k: usize) -> Self {
        let space = SearchSpace::scale_grid();
        Self {
            n_trials: space.size(),
            space,
            k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Vanilla,
    RsTuned,
    RsScale,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Vanilla, Approach::RsTuned, Approach::RsScale];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Vanilla => "vanilla",
            Approach::RsTuned => "rs_tuned",
            Approach::RsScale => "rs_scale",
        }
    }
}

/// Precision, recall and F1 at threshold 0.5 on a held-out set; undefined
/// values count as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutScore {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

fn holdout(labels: &[u8], proba: &[f64]) -> Result<HoldoutScore> {
    let pred = metrics::threshold_labels(proba, 0.5);
    let r = metrics::report(&metrics::confusion(labels, &pred)?);
    Ok(HoldoutScore {
        f1: r.f1.unwrap_or(0.0),
        precision: r.precision.unwrap_or(0.0),
        recall: r.recall.unwrap_or(0.0),
    })
}

/// Hex sha256 of the dataset's CSV rendering.
pub fn dataset_digest(data: &Dataset) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, data)?;
    Ok(Sha256::digest(&buf).iter().map(|b| format!("{b:02x}")).collect())
}

fn cell_seed(seed: u64, size: usize, distribution: f64) -> u64 {
    derive_seed(derive_seed(seed, size as u64), distribution.to_bits())
}

// ---------------------------------------------------------------------------
// grid

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub sizes: Vec<usize>,
    pub distributions: Vec<f64>,
    pub approaches: Vec<Approach>,
    pub base: TrainConfig,
    pub rs_trials: usize,
    pub preprocess: Preprocess,
    pub seed: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            sizes: vec![1_000, 10_000, 100_000],
            distributions: vec![0.50, 0.45, 0.25, 0.05],
            approaches: Approach::ALL.to_vec(),
            base: TrainConfig::default(),
            rs_trials: 25,
            preprocess: Preprocess::Fit(MissingPolicy::default()),
            seed: 0,
        }
    }
}

/// Fold count used for a subset of `size` rows.
pub fn folds_for_size(size: usize) -> usize {
    if size >= 100_000 {
        2
    } else {
        5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub size: usize,
    pub distribution: f64,
    pub approach: Approach,
    pub fold_f1: Vec<f64>,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub baseline_prc: f64,
    /// Fold F1 against a constant baseline-PRC sequence of the same length.
    pub vs_baseline: Option<TTest>,
    pub seconds: f64,
}

fn approach_f1(data: &Dataset, approach: Approach, opts: &GridOptions, k: usize, seed: u64) -> Result<Vec<f64>> {
    let mut base = opts.base;
    base.seed = seed;
    match approach {
        Approach::Vanilla => Ok(cross_validate(data, &base, k, seed, opts.preprocess)?.f1),
        Approach::RsTuned => {
            let r = random_search(data, &SearchSpace::rs_grid(), &base, opts.rs_trials, k, seed, opts.preprocess)?;
            Ok(r.winner()?.scores.f1.clone())
        }
        Approach::RsScale => {
            let space = SearchSpace::scale_grid();
            let r = random_search(data, &space, &base, space.size(), k, seed, opts.preprocess)?;
            Ok(r.winner()?.scores.f1.clone())
        }
    }
}

/// One cell of the grid. Its randomness depends only on the run seed, the
/// size and the distribution, so cells can be computed in any order.
pub fn run_grid_cell(source: &Dataset, size: usize, distribution: f64, approach: Approach, opts: &GridOptions) -> Result<GridCell> {
    let seed = cell_seed(opts.seed, size, distribution);
    let subset = stratified_subset(source, size, distribution, seed)?;
    let k = folds_for_size(size);
    let start = Instant::now();
    let fold_f1 = approach_f1(&subset, approach, opts, k, seed)?;
    let seconds = start.elapsed().as_secs_f64();
    let baseline_prc = metrics::baseline_prc(&subset.labels)?;
    let (f1_mean, f1_std) = mean_std(&fold_f1);
    let vs_baseline = ttest_unpaired(&fold_f1, &vec![baseline_prc; fold_f1.len()]).ok();
    Ok(GridCell {
        size,
        distribution,
        approach,
        fold_f1,
        f1_mean,
        f1_std,
        baseline_prc,
        vs_baseline,
        seconds,
    })
}

/// Every (size, distribution, approach) cell, in that nesting order.
pub fn run_grid(source: &Dataset, opts: &GridOptions) -> Result<Vec<GridCell>> {
    let mut cells = Vec::new();
    for &size in &opts.sizes {
        for &dist in &opts.distributions {
            for &approach in &opts.approaches {
                cells.push(run_grid_cell(source, size, dist, approach, opts)?);
            }
        }
    }
    Ok(cells)
}

// ---------------------------------------------------------------------------
// sampling to balance

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingArm {
    Vanilla,
    SampledVanilla,
    RsTuned,
    SampledRsTuned,
}

impl SamplingArm {
    pub const ALL: [SamplingArm; 4] = [
        SamplingArm::Vanilla,
        SamplingArm::SampledVanilla,
        SamplingArm::RsTuned,
        SamplingArm::SampledRsTuned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplingArm::Vanilla => "vanilla",
            SamplingArm::SampledVanilla => "sampling_vanilla",
            SamplingArm::RsTuned => "rs_tuned",
            SamplingArm::SampledRsTuned => "sampling_rs_tuned",
        }
    }

    fn sampled(self) -> bool {
        matches!(self, SamplingArm::SampledVanilla | SamplingArm::SampledRsTuned)
    }

    fn tuned(self) -> bool {
        matches!(self, SamplingArm::RsTuned | SamplingArm::SampledRsTuned)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub distributions: Vec<f64>,
    /// Rows drawn per distribution before the time split.
    pub size: usize,
    pub train_fraction: f64,
    pub base: TrainConfig,
    /// Tuning used by the tuned arms; `None` skips them.
    pub tune: Option<TuneSpec>,
    pub preprocess: Preprocess,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            distributions: vec![0.50, 0.45, 0.25, 0.05],
            size: 10_000,
            train_fraction: 0.8,
            base: TrainConfig::default(),
            tune: Some(TuneSpec::rs(25, 5)),
            preprocess: Preprocess::Fit(MissingPolicy::default()),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingCell {
    pub distribution: f64,
    pub arm: SamplingArm,
    pub score: HoldoutScore,
    pub train_rows: usize,
    pub train_positives: usize,
    /// Digest of the test partition this arm was scored on.
    pub test_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCurve {
    pub name: String,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingResult {
    pub cells: Vec<SamplingCell>,
    pub curves: Vec<NamedCurve>,
}

/// Trains on `train` (tuning first when asked) with preprocessing fit on
/// `train` only, and scores `test`.
fn train_and_score(
    train: &Dataset,
    test: &Dataset,
    base: &TrainConfig,
    tune: Option<&TuneSpec>,
    preprocess: Preprocess,
    seed: u64,
) -> Result<(HoldoutScore, Vec<f64>)> {
    let (model, state) = match tune {
        Some(t) => {
            let cv = random_search(train, &t.space, base, t.n_trials, t.k, seed, preprocess)?;
            fit_best(train, &cv, preprocess)?
        }
        None => match preprocess {
            Preprocess::None => (gbt::fit(train, base, None)?, None),
            Preprocess::Fit(policy) => {
                let state = TransformState::fit(train, policy)?;
                (gbt::fit(&state.apply(train)?, base, None)?, Some(state))
            }
        },
    };
    let test_in = match &state {
        Some(s) => s.apply(test)?,
        None => test.clone(),
    };
    let proba = model.predict_proba(&test_in)?;
    Ok((holdout(&test.labels, &proba)?, proba))
}

/// Time split per distribution, then the four arms. Sampling touches the
/// training partition only.
pub fn sampling_experiment(data: &Dataset, opts: &SamplingOptions) -> Result<SamplingResult> {
    if data.time_index.is_none() {
        return Err(Error::MissingTimeIndex);
    }
    let mut cells = Vec::new();
    let mut curves = Vec::new();
    for &dist in &opts.distributions {
        let seed = cell_seed(opts.seed, opts.size, dist);
        let subset = stratified_subset(data, opts.size, dist, seed)?;
        let (train, test) = time_split_fraction(&subset, opts.train_fraction)?;
        let sampled = balance_preserve_size(&train, &SamplingPlan::new(Strategy::CombinedPreserveSize, seed))?.data;
        let mut base = opts.base;
        base.seed = seed;
        for arm in SamplingArm::ALL {
            if arm.tuned() && opts.tune.is_none() {
                continue;
            }
            let arm_train = if arm.sampled() { &sampled } else { &train };
            let (score, proba) = train_and_score(arm_train, &test, &base, opts.tune.as_ref().filter(|_| arm.tuned()), opts.preprocess, seed)?;
            if !arm.tuned() {
                curves.push(NamedCurve {
                    name: format!("{}_{dist}", arm.name()),
                    curve: metrics::pr_curve(&test.labels, &proba)?,
                });
            }
            cells.push(SamplingCell {
                distribution: dist,
                arm,
                score,
                train_rows: arm_train.n_rows(),
                train_positives: arm_train.n_positives(),
                test_digest: dataset_digest(&test)?,
            });
        }
    }
    Ok(SamplingResult { cells, curves })
}

// ---------------------------------------------------------------------------
// imbalance-aware objectives

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceOptions {
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub k: usize,
    pub base: TrainConfig,
    pub preprocess: Preprocess,
    pub seed: u64,
}

impl Default for ImbalanceOptions {
    fn default() -> Self {
        Self {
            gammas: vec![1.0, 2.0, 3.0],
            alphas: vec![1.0, 2.0, 3.0, 4.0],
            k: 5,
            base: TrainConfig::default(),
            preprocess: Preprocess::Fit(MissingPolicy::default()),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceRow {
    pub name: String,
    pub objective: Objective,
    pub fold_f1: Vec<f64>,
    pub f1_mean: f64,
    pub f1_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceResult {
    pub rows: Vec<ImbalanceRow>,
}

impl ImbalanceResult {
    pub fn vanilla(&self) -> Option<&ImbalanceRow> {
        self.rows.iter().find(|r| r.objective.focal_gamma.is_none() && r.objective.weighted_alpha.is_none())
    }

    fn best_by(&self, pick: impl Fn(&Objective) -> bool) -> Option<&ImbalanceRow> {
        let mut best: Option<&ImbalanceRow> = None;
        for r in self.rows.iter().filter(|r| pick(&r.objective)) {
            if best.is_none_or(|b| r.f1_mean > b.f1_mean) {
                best = Some(r);
            }
        }
        best
    }

    pub fn best_focal(&self) -> Option<&ImbalanceRow> {
        self.best_by(|o| o.focal_gamma.is_some())
    }

    pub fn best_weighted(&self) -> Option<&ImbalanceRow> {
        self.best_by(|o| o.weighted_alpha.is_some())
    }
}

/// k-fold F1 of the plain objective and of each focal and weighted variant,
/// all on the same folds.
pub fn imbalance_objective_experiment(data: &Dataset, opts: &ImbalanceOptions) -> Result<ImbalanceResult> {
    let mut variants = vec![("vanilla".to_string(), opts.base.objective)];
    variants.extend(opts.gammas.iter().map(|&g| {
        (format!("focal_gamma_{g}"), Objective { focal_gamma: Some(g), ..opts.base.objective })
    }));
    variants.extend(opts.alphas.iter().map(|&a| {
        (format!("weighted_alpha_{a}"), Objective { weighted_alpha: Some(a), ..opts.base.objective })
    }));
    let mut rows = Vec::with_capacity(variants.len());
    for (name, objective) in variants {
        let config = TrainConfig { objective, ..opts.base };
        let fold_f1 = cross_validate(data, &config, opts.k, opts.seed, opts.preprocess)?.f1;
        let (f1_mean, f1_std) = mean_std(&fold_f1);
        rows.push(ImbalanceRow {
            name,
            objective,
            fold_f1,
            f1_mean,
            f1_std,
        });
    }
    Ok(ImbalanceResult { rows })
}

// ---------------------------------------------------------------------------
// drift

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    MovingWindow,
    TrainOnce,
}

impl DriftMode {
    pub fn name(self) -> &'static str {
        match self {
            DriftMode::MovingWindow => "moving_window",
            DriftMode::TrainOnce => "train_once",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftOptions {
    pub train_window: usize,
    pub test_window: usize,
    pub n_sections: usize,
    pub base: TrainConfig,
    /// Tuning run on every training window; `None` fits `base` directly.
    pub tune: Option<TuneSpec>,
    pub preprocess: Preprocess,
    pub seed: u64,
}

impl Default for DriftOptions {
    fn default() -> Self {
        Self {
            train_window: 10_000,
            test_window: 2_500,
            n_sections: 5,
            base: TrainConfig::default(),
            tune: Some(TuneSpec::scale(5)),
            preprocess: Preprocess::Fit(MissingPolicy::default()),
            seed: 0,
        }
    }
}

impl DriftOptions {
    pub fn required_rows(&self) -> usize {
        self.train_window + self.n_sections * self.test_window
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSection {
    pub index: usize,
    pub train_start: usize,
    pub test_start: usize,
    pub test_end: usize,
    pub score: HoldoutScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRun {
    pub mode: DriftMode,
    pub sections: Vec<DriftSection>,
    pub f1_mean: f64,
    pub f1_std: f64,
}

/// Scores adjacent test sections that follow the first training window.
/// Moving window trains on the rows just before each section; train-once
/// reuses the model fit on the first window.
pub fn drift_experiment(stream: &Dataset, mode: DriftMode, opts: &DriftOptions) -> Result<DriftRun> {
    if stream.time_index.is_none() {
        return Err(Error::MissingTimeIndex);
    }
    let needed = opts.required_rows();
    if stream.n_rows() < needed {
        return Err(Error::InsufficientRows {
            class: "stream",
            needed,
            available: stream.n_rows(),
        });
    }
    let mut base = opts.base;
    base.seed = opts.seed;
    let fit_window = |start: usize| -> Result<_> {
        let train = stream.slice(start..start + opts.train_window);
        let (model, state) = match &opts.tune {
            Some(t) => {
                let cv = random_search(&train, &t.space, &base, t.n_trials, t.k, derive_seed(opts.seed, start as u64), opts.preprocess)?;
                fit_best(&train, &cv, opts.preprocess)?
            }
            None => match opts.preprocess {
                Preprocess::None => (gbt::fit(&train, &base, None)?, None),
                Preprocess::Fit(policy) => {
                    let s = TransformState::fit(&train, policy)?;
                    (gbt::fit(&s.apply(&train)?, &base, None)?, Some(s))
                }
            },
        };
        Ok((model, state))
    };

    let once = match mode {
        DriftMode::TrainOnce => Some(fit_window(0)?),
        DriftMode::MovingWindow => None,
    };
    let mut sections = Vec::with_capacity(opts.n_sections);
    for i in 0..opts.n_sections {
        let test_start = opts.train_window + i * opts.test_window;
        let test_end = test_start + opts.test_window;
        let train_start = match mode {
            DriftMode::TrainOnce => 0,
            DriftMode::MovingWindow => test_start - opts.train_window,
        };
        let fitted;
        let (model, state) = match &once {
            Some(m) => m,
            None => {
                fitted = fit_window(train_start)?;
                &fitted
            }
        };
        let test = stream.slice(test_start..test_end);
        let test_in = match state {
            Some(s) => s.apply(&test)?,
            None => test.clone(),
        };
        let proba = model.predict_proba(&test_in)?;
        sections.push(DriftSection {
            index: i,
            train_start,
            test_start,
            test_end,
            score: holdout(&test.labels, &proba)?,
        });
    }
    let f1: Vec<f64> = sections.iter().map(|s| s.score.f1).collect();
    let (f1_mean, f1_std) = mean_std(&f1);
    Ok(DriftRun {
        mode,
        sections,
        f1_mean,
        f1_std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{synth_generate, SynthSpec};

    fn small_stream(n: usize) -> Dataset {
        synth_generate(&SynthSpec {
            n_rows: n,
            n_numeric: 3,
            n_categorical: 1,
            pos_fraction: 0.3,
            seed: 4,
            ..SynthSpec::default()
        })
        .unwrap()
    }

    fn quick() -> TrainConfig {
        TrainConfig {
            n_trees: 5,
            max_depth: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn drift_geometry() {
        let d = small_stream(900);
        let opts = DriftOptions {
            train_window: 400,
            test_window: 100,
            n_sections: 5,
            base: quick(),
            tune: None,
            ..DriftOptions::default()
        };
        let run = drift_experiment(&d, DriftMode::MovingWindow, &opts).unwrap();
        let starts: Vec<(usize, usize)> = run.sections.iter().map(|s| (s.train_start, s.test_start)).collect();
        assert_eq!(starts, vec![(0, 400), (100, 500), (200, 600), (300, 700), (400, 800)]);
        let once = drift_experiment(&d, DriftMode::TrainOnce, &opts).unwrap();
        assert!(once.sections.iter().all(|s| s.train_start == 0));
        assert_eq!(once.sections[0].score, run.sections[0].score);
        assert!(matches!(
            drift_experiment(&small_stream(899), DriftMode::TrainOnce, &opts),
            Err(Error::InsufficientRows { needed: 900, .. })
        ));
    }

    #[test]
    fn alpha_one_matches_vanilla() {
        let d = small_stream(300);
        let opts = ImbalanceOptions {
            base: quick(),
            gammas: vec![0.0],
            alphas: vec![1.0],
            ..ImbalanceOptions::default()
        };
        let r = imbalance_objective_experiment(&d, &opts).unwrap();
        let v = r.vanilla().unwrap();
        assert_eq!(r.best_weighted().unwrap().fold_f1, v.fold_f1);
        assert_eq!(r.best_focal().unwrap().fold_f1, v.fold_f1);
    }

    #[test]
    fn grid_cells_are_order_independent() {
        let d = small_stream(2000);
        let opts = GridOptions {
            sizes: vec![200, 400],
            distributions: vec![0.5, 0.25],
            approaches: vec![Approach::Vanilla],
            base: quick(),
            ..GridOptions::default()
        };
        let cells = run_grid(&d, &opts).unwrap();
        assert_eq!(cells.len(), 4);
        let mut reversed = GridOptions { ..opts.clone() };
        reversed.sizes.reverse();
        reversed.distributions.reverse();
        for c in run_grid(&d, &reversed).unwrap() {
            let twin = cells.iter().find(|x| x.size == c.size && x.distribution == c.distribution).unwrap();
            assert_eq!(twin.fold_f1, c.fold_f1);
            assert_eq!(twin.baseline_prc, c.distribution);
        }
    }

    #[test]
    fn sampling_keeps_test_identical() {
        let d = small_stream(2000);
        let opts = SamplingOptions {
            distributions: vec![0.25],
            size: 1000,
            base: quick(),
            tune: Some(TuneSpec::scale(2)),
            ..SamplingOptions::default()
        };
        let r = sampling_experiment(&d, &opts).unwrap();
        assert_eq!(r.cells.len(), 4);
        assert!(r.cells.windows(2).all(|w| w[0].test_digest == w[1].test_digest));
        let sampled = r.cells.iter().find(|c| c.arm == SamplingArm::SampledVanilla).unwrap();
        assert_eq!(sampled.train_rows, 800);
        assert_eq!(sampled.train_positives, 400);
    }
}
