//! Second-order gradient tree boosting for binary classification.
//!
//! Each round computes per-row gradients and hessians of the configured
//! objective at the current margins, grows one regression tree on them with
//! exact greedy split search, and adds the tree's learning-rate-scaled leaf
//! weights `-G / (H + lambda)` to the margins.

mod matrix;
mod model_io;
mod objective;
mod split;
mod tree;

pub use matrix::FeatureMatrix;
pub use model_io::MODEL_FORMAT_VERSION;
pub use objective::{grad_hess, sigmoid, GradHess, Objective, HESSIAN_FLOOR};
pub use split::{best_split, leaf_weight, split_gain, SplitCandidate, SplitParams};
pub use tree::TreeNode;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics;
use crate::rng::{derive_seed, seeded, streams};
use matrix::SortedColumns;
use tree::{grow_tree, GrowParams};

/// Booster hyper-parameters. Defaults reproduce the vanilla configuration:
/// depth 6, learning rate 0.3, no row or column subsampling, 100 trees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub objective: Objective,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub n_trees: usize,
    pub l2_lambda: f64,
    pub min_split_loss: f64,
    pub min_child_hessian: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            objective: Objective::logistic(),
            max_depth: 6,
            learning_rate: 0.3,
            subsample: 1.0,
            colsample_bytree: 1.0,
            n_trees: 100,
            l2_lambda: 1.0,
            min_split_loss: 0.0,
            min_child_hessian: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        let ratio_ok = |r: f64| r > 0.0 && r <= 1.0;
        if !ratio_ok(self.subsample) {
            return Err(Error::InvalidParameter(format!(
                "subsample must be in (0, 1], got {}",
                self.subsample
            )));
        }
        if !ratio_ok(self.colsample_bytree) {
            return Err(Error::InvalidParameter(format!(
                "colsample_bytree must be in (0, 1], got {}",
                self.colsample_bytree
            )));
        }
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.l2_lambda < 0.0 || self.min_split_loss < 0.0 || self.min_child_hessian < 0.0 {
            return Err(Error::InvalidParameter(
                "l2_lambda, min_split_loss and min_child_hessian must be non-negative".into(),
            ));
        }
        Ok(())
    }

    fn grow_params(&self) -> GrowParams {
        GrowParams {
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            split: SplitParams {
                l2_lambda: self.l2_lambda,
                min_split_loss: self.min_split_loss,
                min_child_hessian: self.min_child_hessian,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub trees: Vec<TreeNode>,
    pub base_margin: f64,
    pub objective: Objective,
    pub schema_fingerprint: String,
    pub n_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub train_loss: f64,
    pub eval_auc_pr: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitLog {
    pub rounds: Vec<RoundLog>,
}

impl FitLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("round,train_loss,eval_auc_pr\n");
        for r in &self.rounds {
            let auc = r.eval_auc_pr.map_or_else(String::new, |a| format!("{a}"));
            s.push_str(&format!("{},{},{}\n", r.round, r.train_loss, auc));
        }
        s
    }
}

fn check_labels(labels: &[u8]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let pos = labels.iter().filter(|&&l| l != 0).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Trains on an encoded dataset.
pub fn fit(train: &Dataset, config: &TrainConfig, eval_set: Option<&Dataset>) -> Result<Ensemble> {
    fit_dataset(train, config, eval_set, false).map(|(m, _)| m)
}

pub fn fit_with_log(
    train: &Dataset,
    config: &TrainConfig,
    eval_set: Option<&Dataset>,
) -> Result<(Ensemble, FitLog)> {
    fit_dataset(train, config, eval_set, true)
}

fn fit_dataset(
    train: &Dataset,
    config: &TrainConfig,
    eval_set: Option<&Dataset>,
    with_log: bool,
) -> Result<(Ensemble, FitLog)> {
    let matrix = FeatureMatrix::from_dataset(train)?;
    let eval = match eval_set {
        Some(e) => {
            if e.schema.fingerprint() != train.schema.fingerprint() {
                return Err(Error::SchemaMismatch {
                    model: train.schema.fingerprint(),
                    data: e.schema.fingerprint(),
                });
            }
            Some((FeatureMatrix::from_dataset(e)?, e.labels.as_slice()))
        }
        None => None,
    };
    let eval_ref = eval.as_ref().map(|(m, l)| (m, *l));
    let (mut model, log) = boost(&matrix, &train.labels, config, eval_ref, with_log)?;
    model.schema_fingerprint = train.schema.fingerprint();
    Ok((model, log))
}

/// Trains directly on a feature matrix; the fingerprint is left empty.
pub fn fit_matrix(
    matrix: &FeatureMatrix,
    labels: &[u8],
    config: &TrainConfig,
    eval: Option<(&FeatureMatrix, &[u8])>,
) -> Result<(Ensemble, FitLog)> {
    boost(matrix, labels, config, eval, true)
}

fn boost(
    matrix: &FeatureMatrix,
    labels: &[u8],
    config: &TrainConfig,
    eval: Option<(&FeatureMatrix, &[u8])>,
    with_log: bool,
) -> Result<(Ensemble, FitLog)> {
    config.validate()?;
    check_labels(labels)?;
    if matrix.n_rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: matrix.n_rows(),
            right: labels.len(),
        });
    }
    if matrix.n_features() == 0 {
        return Err(Error::Empty("feature columns"));
    }

    let n = matrix.n_rows();
    let sorted = SortedColumns::new(matrix);
    let grow = config.grow_params();
    let base_margin = 0.0;
    let mut margins = vec![base_margin; n];
    let mut eval_margins = eval.map(|(m, _)| vec![base_margin; m.n_rows()]);
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut log = FitLog::default();

    let n_rows_sampled = ((n as f64 * config.subsample).round() as usize).clamp(1, n);
    let n_cols_sampled =
        ((matrix.n_features() as f64 * config.colsample_bytree).round() as usize).clamp(1, matrix.n_features());
    let all_features: Vec<usize> = (0..matrix.n_features()).collect();

    for round in 0..config.n_trees {
        let gh: Vec<GradHess> = labels
            .iter()
            .zip(&margins)
            .map(|(&y, &z)| config.objective.grad_hess(y, z))
            .collect();

        let round_seed = derive_seed(config.seed, round as u64);
        let in_sample = if n_rows_sampled == n {
            vec![true; n]
        } else {
            let mut mask = vec![false; n];
            let mut rng = seeded(round_seed, streams::ROW_SAMPLE);
            for r in sample(&mut rng, n, n_rows_sampled) {
                mask[r] = true;
            }
            mask
        };
        let features = if n_cols_sampled == matrix.n_features() {
            all_features.clone()
        } else {
            let mut rng = seeded(round_seed, streams::COL_SAMPLE);
            let mut f = sample(&mut rng, matrix.n_features(), n_cols_sampled).into_vec();
            f.sort_unstable();
            f
        };

        let tree = grow_tree(matrix, &sorted, &gh, &in_sample, &features, &grow);
        for (r, m) in margins.iter_mut().enumerate() {
            *m += tree.score(|f| matrix.value(r, f));
        }
        if !with_log {
            trees.push(tree);
            continue;
        }
        let train_loss = labels
            .iter()
            .zip(&margins)
            .map(|(&y, &z)| config.objective.loss(y, z))
            .sum();
        let eval_auc_pr = match (eval, eval_margins.as_mut()) {
            (Some((em, el)), Some(emargins)) => {
                for (r, m) in emargins.iter_mut().enumerate() {
                    *m += tree.score(|f| em.value(r, f));
                }
                metrics::auc_pr(el, emargins).ok()
            }
            _ => None,
        };
        log.rounds.push(RoundLog {
            round,
            train_loss,
            eval_auc_pr,
        });
        trees.push(tree);
    }

    Ok((
        Ensemble {
            trees,
            base_margin,
            objective: config.objective,
            schema_fingerprint: String::new(),
            n_features: matrix.n_features(),
        },
        log,
    ))
}

impl Ensemble {
    fn check(&self, data: &Dataset) -> Result<()> {
        let fp = data.schema.fingerprint();
        if fp != self.schema_fingerprint {
            return Err(Error::SchemaMismatch {
                model: self.schema_fingerprint.clone(),
                data: fp,
            });
        }
        Ok(())
    }

    pub fn predict_margin(&self, rows: &Dataset) -> Result<Vec<f64>> {
        self.check(rows)?;
        self.predict_margin_matrix(&FeatureMatrix::from_dataset(rows)?)
    }

    pub fn predict_margin_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        if matrix.n_features() != self.n_features {
            return Err(Error::ColumnMismatch(format!(
                "model expects {} features, got {}",
                self.n_features,
                matrix.n_features()
            )));
        }
        Ok((0..matrix.n_rows())
            .map(|r| {
                self.trees
                    .iter()
                    .fold(self.base_margin, |m, t| m + t.score(|f| matrix.value(r, f)))
            })
            .collect())
    }

    pub fn predict_proba(&self, rows: &Dataset) -> Result<Vec<f64>> {
        Ok(self.predict_margin(rows)?.into_iter().map(sigmoid).collect())
    }

    pub fn predict_proba_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self.predict_margin_matrix(matrix)?.into_iter().map(sigmoid).collect())
    }

    pub fn predict_label(&self, rows: &Dataset, threshold: f64) -> Result<Vec<u8>> {
        Ok(metrics::threshold_labels(&self.predict_proba(rows)?, threshold))
    }
}
