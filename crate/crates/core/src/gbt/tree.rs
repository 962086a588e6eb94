use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{FeatureMatrix, SortedColumns};
use super::objective::GradHess;
use super::split::{leaf_weight, midpoint, ScanState, SplitCandidate, SplitParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        default_left: bool,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn leaf(weight: f64) -> Self {
        TreeNode::Leaf { weight }
    }

    pub fn split(feature: usize, threshold: f64, default_left: bool, left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Split {
            feature,
            threshold,
            default_left,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Leaf score for one row; `value(f)` yields feature `f`, `NaN` if missing.
    pub fn score(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    let x = value(*feature);
                    let go_left = if x.is_nan() { *default_left } else { x < *threshold };
                    node = if go_left { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

/// Tree-shape limits and regularization for one boosting round.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub split: SplitParams,
}

enum Slot {
    Pending { g: f64, h: f64 },
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        default_left: bool,
        left: usize,
        right: usize,
    },
}

/// Rows not taking part in the current level.
const INACTIVE: u32 = u32::MAX;

/// A row's open node at the current level next to its gradient pair.
#[derive(Clone, Copy)]
struct NodeRow {
    node: u32,
    grad: f64,
    hess: f64,
}

/// Grows one tree over the rows flagged in `in_sample`, restricted to the
/// listed `features`.
///
/// The tree is built level by level: each level scans every selected feature
/// once in presorted order, accumulating statistics for all open nodes at the
/// same time. Every node's split is the best over (feature, threshold) with
/// ties going to the lowest feature index and then the lowest threshold, so
/// the result is identical to growing each node independently.
pub(crate) fn grow_tree(
    matrix: &FeatureMatrix,
    sorted: &SortedColumns,
    gh: &[GradHess],
    in_sample: &[bool],
    features: &[usize],
    params: &GrowParams,
) -> TreeNode {
    let n = matrix.n_rows();
    let mut slots: Vec<Slot> = Vec::new();

    // position[r] = index into `open` for the node holding row r
    let mut position = vec![INACTIVE; n];
    let (mut g0, mut h0) = (0.0, 0.0);
    for r in 0..n {
        if in_sample[r] {
            position[r] = 0;
            g0 += gh[r].grad;
            h0 += gh[r].hess;
        }
    }
    slots.push(Slot::Pending { g: g0, h: h0 });
    let mut open: Vec<usize> = vec![0];

    for depth in 0..=params.max_depth {
        if open.is_empty() {
            break;
        }
        let totals: Vec<(f64, f64)> = open
            .iter()
            .map(|&s| match slots[s] {
                Slot::Pending { g, h } => (g, h),
                _ => unreachable!("open slot already resolved"),
            })
            .collect();
        let splittable: Vec<bool> = totals
            .iter()
            .map(|&(_, h)| depth < params.max_depth && h >= 2.0 * params.split.min_child_hessian)
            .collect();

        let best = if splittable.iter().any(|&s| s) {
            // rows of unsplittable nodes are skipped by the scan
            let rows: Vec<NodeRow> = position
                .iter()
                .zip(gh)
                .map(|(&k, g)| NodeRow {
                    node: if k != INACTIVE && splittable[k as usize] { k } else { INACTIVE },
                    grad: g.grad,
                    hess: g.hess,
                })
                .collect();
            find_level_splits(sorted, &rows, &totals, features, &params.split)
        } else {
            vec![None; open.len()]
        };

        // resolve the level: leaves get weights, splits get two fresh slots
        let mut child_of: Vec<Option<(usize, usize)>> = vec![None; open.len()];
        let mut next_open = Vec::new();
        for (k, &slot) in open.iter().enumerate() {
            match best[k] {
                Some((feature, cand)) => {
                    let left = slots.len();
                    slots.push(Slot::Pending { g: 0.0, h: 0.0 });
                    slots.push(Slot::Pending { g: 0.0, h: 0.0 });
                    slots[slot] = Slot::Split {
                        feature,
                        threshold: cand.threshold,
                        default_left: cand.default_left,
                        left,
                        right: left + 1,
                    };
                    child_of[k] = Some((next_open.len(), next_open.len() + 1));
                    next_open.push(left);
                    next_open.push(left + 1);
                }
                None => {
                    let (g, h) = totals[k];
                    slots[slot] = Slot::Leaf(leaf_weight(g, h, params.split.l2_lambda) * params.learning_rate);
                }
            }
        }

        // route rows to children and accumulate child totals in row order
        let mut child_totals = vec![(0.0f64, 0.0f64); next_open.len()];
        for r in 0..n {
            let k = position[r];
            if k == INACTIVE {
                continue;
            }
            let k = k as usize;
            match (child_of[k], best[k]) {
                (Some((l, rgt)), Some((feature, cand))) => {
                    let x = matrix.value(r, feature);
                    let go_left = if x.is_nan() { cand.default_left } else { x < cand.threshold };
                    let c = if go_left { l } else { rgt };
                    position[r] = c as u32;
                    child_totals[c].0 += gh[r].grad;
                    child_totals[c].1 += gh[r].hess;
                }
                _ => position[r] = INACTIVE,
            }
        }
        for (&slot, &(g, h)) in next_open.iter().zip(&child_totals) {
            slots[slot] = Slot::Pending { g, h };
        }
        open = next_open;
    }

    build(&slots, 0)
}

fn build(slots: &[Slot], idx: usize) -> TreeNode {
    match slots[idx] {
        Slot::Leaf(w) => TreeNode::Leaf { weight: w },
        Slot::Split {
            feature,
            threshold,
            default_left,
            left,
            right,
        } => TreeNode::split(feature, threshold, default_left, build(slots, left), build(slots, right)),
        Slot::Pending { .. } => unreachable!("unresolved slot after growth"),
    }
}

#[allow(clippy::too_many_arguments)]
fn find_level_splits(
    sorted: &SortedColumns,
    rows: &[NodeRow],
    totals: &[(f64, f64)],
    features: &[usize],
    params: &SplitParams,
) -> Vec<Option<(usize, SplitCandidate)>> {
    let n_open = totals.len();
    let per_feature: Vec<Vec<Option<SplitCandidate>>> = features
        .par_iter()
        .map(|&f| scan_feature(sorted, rows, totals, f, params))
        .collect();

    // fixed-order reduction: features ascending, strictly better wins
    let mut best: Vec<Option<(usize, SplitCandidate)>> = vec![None; n_open];
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by_key(|&i| features[i]);
    for i in order {
        let f = features[i];
        for (k, cand) in per_feature[i].iter().enumerate() {
            if let Some(c) = cand {
                let better = match &best[k] {
                    Some((_, b)) => c.gain > b.gain,
                    None => true,
                };
                if better {
                    best[k] = Some((f, *c));
                }
            }
        }
    }
    best
}

fn scan_feature(
    sorted: &SortedColumns,
    rows: &[NodeRow],
    totals: &[(f64, f64)],
    feature: usize,
    params: &SplitParams,
) -> Vec<Option<SplitCandidate>> {
    let n_open = totals.len();
    let mut missing: Vec<Option<(f64, f64)>> = vec![None; n_open];
    for &r in sorted.missing(feature) {
        let row = rows[r as usize];
        if row.node != INACTIVE {
            let m = missing[row.node as usize].get_or_insert((0.0, 0.0));
            m.0 += row.grad;
            m.1 += row.hess;
        }
    }
    let mut states: Vec<ScanState> = (0..n_open)
        .map(|k| ScanState::new(totals[k].0, totals[k].1, missing[k], params))
        .collect();
    let mut left = vec![(0.0f64, 0.0f64); n_open];
    let mut last = vec![f64::NAN; n_open];

    let (order, values) = sorted.column(feature);
    for (&r, &x) in order.iter().zip(values) {
        let row = rows[r as usize];
        if row.node == INACTIVE {
            continue;
        }
        let k = row.node as usize;
        let prev = last[k];
        if x > prev {
            // NaN `prev` (first row of the node) never compares greater
            states[k].consider(left[k].0, left[k].1, midpoint(prev, x), params);
        }
        left[k].0 += row.grad;
        left[k].1 += row.hess;
        last[k] = x;
    }
    states.into_iter().map(|s| s.best).collect()
}
