//! Exact greedy split evaluation.

use serde::{Deserialize, Serialize};

/// Regularization and constraints shared by every split decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    pub l2_lambda: f64,
    pub min_split_loss: f64,
    pub min_child_hessian: f64,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self {
            l2_lambda: 1.0,
            min_split_loss: 0.0,
            min_child_hessian: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub gain: f64,
    /// Rows with `value < threshold` go left.
    pub threshold: f64,
    /// Branch taken by rows whose value is missing.
    pub default_left: bool,
}

#[inline]
fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Gain of splitting a node with totals `(g, h)` into a left child `(gl, hl)`
/// and the complement, or `None` if a child violates the hessian floor.
#[inline]
pub fn split_gain(gl: f64, hl: f64, g: f64, h: f64, params: &SplitParams) -> Option<f64> {
    gain_with_parent(gl, hl, g, h, score(g, h, params.l2_lambda), params)
}

#[inline]
fn gain_with_parent(
    gl: f64,
    hl: f64,
    g: f64,
    h: f64,
    parent: f64,
    params: &SplitParams,
) -> Option<f64> {
    let gr = g - gl;
    let hr = h - hl;
    if hl < params.min_child_hessian || hr < params.min_child_hessian {
        return None;
    }
    let lambda = params.l2_lambda;
    Some(0.5 * (score(gl, hl, lambda) + score(gr, hr, lambda) - parent) - params.min_split_loss)
}

/// Optimal leaf value before the learning rate is applied.
#[inline]
pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

/// Midpoint between consecutive distinct values, nudged so that `lo` stays
/// strictly left of the threshold.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = (lo + hi) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Tracks the best candidate along one ascending scan of a feature.
///
/// Missing-left is evaluated before missing-right and a later candidate must
/// be strictly better, so ties resolve to the lowest threshold and then to the
/// left default.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScanState {
    g_total: f64,
    h_total: f64,
    g_missing: f64,
    h_missing: f64,
    has_missing: bool,
    parent: f64,
    pub best: Option<SplitCandidate>,
}

impl ScanState {
    pub fn new(g_total: f64, h_total: f64, missing: Option<(f64, f64)>, params: &SplitParams) -> Self {
        let (g_missing, h_missing) = missing.unwrap_or((0.0, 0.0));
        Self {
            g_total,
            h_total,
            g_missing,
            h_missing,
            has_missing: missing.is_some(),
            parent: score(g_total, h_total, params.l2_lambda),
            best: None,
        }
    }

    #[inline]
    fn offer(&mut self, gl: f64, hl: f64, threshold: f64, default_left: bool, params: &SplitParams) {
        if let Some(gain) = gain_with_parent(gl, hl, self.g_total, self.h_total, self.parent, params) {
            let better = match &self.best {
                Some(b) => gain > b.gain,
                None => gain > 0.0,
            };
            if better {
                self.best = Some(SplitCandidate {
                    gain,
                    threshold,
                    default_left,
                });
            }
        }
    }

    /// `gl`/`hl` sum the non-missing rows strictly below `threshold`.
    #[inline]
    pub fn consider(&mut self, gl: f64, hl: f64, threshold: f64, params: &SplitParams) {
        if self.has_missing {
            self.offer(gl + self.g_missing, hl + self.h_missing, threshold, true, params);
            self.offer(gl, hl, threshold, false, params);
        } else {
            self.offer(gl, hl, threshold, true, params);
        }
    }
}

/// Best split of one node along one feature.
///
/// `samples` holds `(value, grad, hess)` per row; `NaN` values are missing.
/// Totals are accumulated in the given row order.
pub fn best_split(samples: &[(f64, f64, f64)], params: &SplitParams) -> Option<SplitCandidate> {
    if samples.len() < 2 {
        return None;
    }
    let (mut g, mut h) = (0.0, 0.0);
    let mut missing: Option<(f64, f64)> = None;
    for &(x, gi, hi) in samples {
        g += gi;
        h += hi;
        if x.is_nan() {
            let m = missing.get_or_insert((0.0, 0.0));
            m.0 += gi;
            m.1 += hi;
        }
    }
    let mut order: Vec<usize> = (0..samples.len())
        .filter(|&i| !samples[i].0.is_nan())
        .collect();
    order.sort_by(|&a, &b| samples[a].0.total_cmp(&samples[b].0));

    let mut state = ScanState::new(g, h, missing, params);
    let (mut gl, mut hl) = (0.0, 0.0);
    let mut last: Option<f64> = None;
    for &i in &order {
        let (x, gi, hi) = samples[i];
        if let Some(prev) = last {
            if x > prev {
                state.consider(gl, hl, midpoint(prev, x), params);
            }
        }
        gl += gi;
        hl += hi;
        last = Some(x);
    }
    state.best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_gain() {
        let s = [(1.0, -1.0, 1.0), (2.0, -1.0, 1.0), (3.0, 1.0, 1.0), (4.0, 1.0, 1.0)];
        let c = best_split(&s, &SplitParams::default()).unwrap();
        assert!((c.gain - (0.5 * (4.0 / 3.0 + 4.0 / 3.0 - 0.0 / 5.0))).abs() < 1e-15);
        assert_eq!(c.threshold, 2.5);
    }

    #[test]
    fn constant_feature_has_no_candidate() {
        let s = [(1.0, -1.0, 1.0), (1.0, 1.0, 1.0), (1.0, 1.0, 1.0)];
        assert!(best_split(&s, &SplitParams::default()).is_none());
    }

    #[test]
    fn single_sample_has_no_candidate() {
        assert!(best_split(&[(1.0, -1.0, 5.0)], &SplitParams::default()).is_none());
    }

    #[test]
    fn missing_rows_pick_the_better_side() {
        // the missing row looks like the right-hand group
        let s = [
            (1.0, -1.0, 1.0),
            (2.0, -1.0, 1.0),
            (3.0, 1.0, 1.0),
            (4.0, 1.0, 1.0),
            (f64::NAN, 1.0, 1.0),
        ];
        let c = best_split(&s, &SplitParams::default()).unwrap();
        assert!(!c.default_left);
        assert_eq!(c.threshold, 2.5);

        let s = [
            (1.0, -1.0, 1.0),
            (2.0, -1.0, 1.0),
            (3.0, 1.0, 1.0),
            (4.0, 1.0, 1.0),
            (f64::NAN, -1.0, 1.0),
        ];
        assert!(best_split(&s, &SplitParams::default()).unwrap().default_left);
    }

    #[test]
    fn min_split_loss_suppresses_weak_splits() {
        let s = [(1.0, -1.0, 1.0), (2.0, -1.0, 1.0), (3.0, 1.0, 1.0), (4.0, 1.0, 1.0)];
        let params = SplitParams {
            min_split_loss: 2.0,
            ..SplitParams::default()
        };
        assert!(best_split(&s, &params).is_none());
    }

    #[test]
    fn adjacent_floats_keep_partition() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a < t && b >= t);
    }
}
