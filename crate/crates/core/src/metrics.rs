//! Detection-performance metrics for binary classifiers.
//!
//! Scores whose denominator is zero are reported as `None` rather than 0, so a
//! classifier that never flags anything has an undefined precision instead of
//! a misleadingly perfect or zero one.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn total(&self) -> u64 {
        self.positives() + self.negatives()
    }
}

/// Every score is `None` exactly when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub f_half: Option<f64>,
    pub f2: Option<f64>,
    pub accuracy: Option<f64>,
    pub mcc: Option<f64>,
    pub baseline_prc: f64,
}

pub const REPORT_CSV_HEADER: &str = "precision,recall,f1,f_half,f2,accuracy,mcc,baseline_prc";

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub fn f_beta(precision: Option<f64>, recall: Option<f64>, beta: f64) -> Option<f64> {
    let (p, r) = (precision?, recall?);
    let b2 = beta * beta;
    ratio((1.0 + b2) * p * r, b2 * p + r)
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::Empty("labels"));
    }
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y != 0, p != 0) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn report(cm: &ConfusionMatrix) -> MetricReport {
    let tp = cm.tp as f64;
    let fp = cm.fp as f64;
    let tn = cm.tn as f64;
    let fn_ = cm.fn_ as f64;
    let total = tp + fp + tn + fn_;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let mcc_den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    MetricReport {
        precision,
        recall,
        f1: f_beta(precision, recall, 1.0),
        f_half: f_beta(precision, recall, 0.5),
        f2: f_beta(precision, recall, 2.0),
        accuracy: ratio(tp + tn, total),
        mcc: ratio(tp * tn - fp * fn_, mcc_den),
        baseline_prc: ratio(tp + fn_, total).unwrap_or(0.0),
    }
}

/// Fraction of positives, the precision a random scorer achieves.
pub fn baseline_prc(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Empty("labels"));
    }
    let pos = labels.iter().filter(|&&l| l != 0).count();
    Ok(pos as f64 / labels.len() as f64)
}

fn fmt_score(x: Option<f64>) -> String {
    x.map_or_else(|| "!".to_string(), |v| format!("{v:.4}"))
}

impl MetricReport {
    pub fn csv_row(&self) -> String {
        let cell = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v}"));
        format!(
            "{},{},{},{},{},{},{},{}",
            cell(self.precision),
            cell(self.recall),
            cell(self.f1),
            cell(self.f_half),
            cell(self.f2),
            cell(self.accuracy),
            cell(self.mcc),
            self.baseline_prc
        )
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Precision     {}", fmt_score(self.precision))?;
        writeln!(f, "Recall        {}", fmt_score(self.recall))?;
        writeln!(f, "F1            {}", fmt_score(self.f1))?;
        writeln!(f, "F0.5          {}", fmt_score(self.f_half))?;
        writeln!(f, "F2            {}", fmt_score(self.f2))?;
        writeln!(f, "Accuracy      {}", fmt_score(self.accuracy))?;
        writeln!(f, "MCC           {}", fmt_score(self.mcc))?;
        write!(f, "Baseline PRC  {:.4}", self.baseline_prc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// One point per distinct score, strictest threshold first.
    pub points: Vec<PrPoint>,
    /// Average precision: sum of `(R_i - R_{i-1}) * P_i` along the sweep.
    pub auc: f64,
}

impl PrCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("recall,precision\n");
        for p in &self.points {
            s.push_str(&format!("{},{}\n", p.recall, p.precision));
        }
        s
    }
}

fn check_scored(labels: &[u8], scores: &[f64]) -> Result<()> {
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: scores.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::Empty("labels"));
    }
    Ok(())
}

/// Rows sorted by descending score; ties keep their original order.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

pub fn pr_curve(labels: &[u8], scores: &[f64]) -> Result<PrCurve> {
    check_scored(labels, scores)?;
    let total_pos = labels.iter().filter(|&&l| l != 0).count();
    if total_pos == 0 {
        return Err(Error::NoPositives);
    }
    let order = ranking(scores);
    let mut points = Vec::new();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // all rows tied at this score enter together
        while i < order.len() && scores[order[i]] == threshold {
            tp += usize::from(labels[order[i]] != 0);
            seen += 1;
            i += 1;
        }
        let recall = tp as f64 / total_pos as f64;
        let precision = tp as f64 / seen as f64;
        auc += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(PrPoint {
            threshold,
            recall,
            precision,
        });
    }
    Ok(PrCurve { points, auc })
}

pub fn auc_pr(labels: &[u8], scores: &[f64]) -> Result<f64> {
    pr_curve(labels, scores).map(|c| c.auc)
}

/// Precision among the `n` highest-scored rows.
pub fn precision_at_n(labels: &[u8], scores: &[f64], n: usize) -> Result<f64> {
    check_scored(labels, scores)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n > labels.len() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} exceeds the {} scored rows",
            labels.len()
        )));
    }
    let hits = ranking(scores)
        .into_iter()
        .take(n)
        .filter(|&i| labels[i] != 0)
        .count();
    Ok(hits as f64 / n as f64)
}

/// Labels at a probability threshold (`score >= threshold` is positive).
pub fn threshold_labels(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}

/// F1 at threshold 0.5, with undefined treated as 0 for averaging.
pub fn f1_at_half(labels: &[u8], probabilities: &[f64]) -> Result<f64> {
    let cm = confusion(labels, &threshold_labels(probabilities, 0.5))?;
    Ok(report(&cm).f1.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Option<f64>, b: f64) -> bool {
        a.is_some_and(|a| (a - b).abs() < 1e-12)
    }

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[1, 1, 1, 1], &[1, 1, 1, 1]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(4, 0, 0, 0));
        let cm = confusion(&[1, 0], &[0, 1]).unwrap();
        assert_eq!((cm.fn_, cm.fp), (1, 1));
    }

    #[test]
    fn example_two_counts_from_labels() {
        // 100 positives (50 found), 900 negatives (50 flagged)
        let mut labels = vec![1u8; 100];
        labels.extend(vec![0u8; 900]);
        let mut preds = vec![1u8; 50];
        preds.extend(vec![0u8; 50]);
        preds.extend(vec![1u8; 50]);
        preds.extend(vec![0u8; 850]);
        let cm = confusion(&labels, &preds).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(50, 50, 850, 50));
        let r = report(&cm);
        assert!(close(r.mcc, 40_000.0 / 90_000.0));
        assert!(close(r.f1, 0.5));
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(confusion(&[1], &[1, 0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(confusion(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn all_negative_predictor() {
        let r = report(&ConfusionMatrix::new(0, 0, 900, 100));
        assert_eq!(r.precision, None);
        assert_eq!(r.f1, None);
        assert_eq!(r.f_half, None);
        assert_eq!(r.f2, None);
        assert_eq!(r.mcc, None);
        assert!(close(r.recall, 0.0));
        assert!(close(r.accuracy, 0.9));
    }

    #[test]
    fn baseline() {
        let mut l = vec![1u8; 500];
        l.extend(vec![0u8; 500]);
        assert_eq!(baseline_prc(&l).unwrap(), 0.5);
        let mut l = vec![1u8; 100];
        l.extend(vec![0u8; 900]);
        assert_eq!(baseline_prc(&l).unwrap(), 0.1);
        assert_eq!(baseline_prc(&[1, 1]).unwrap(), 1.0);
        assert!(baseline_prc(&[]).is_err());
    }

    #[test]
    fn pr_curve_edge_cases() {
        let c = pr_curve(&[0, 1, 0, 1], &[0.1, 0.9, 0.2, 0.8]).unwrap();
        assert_eq!(c.auc, 1.0);

        let labels = [1, 0, 0, 0, 1, 0, 0, 0, 0, 0];
        let c = pr_curve(&labels, &[0.3; 10]).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].recall, 1.0);
        assert_eq!(c.points[0].precision, 0.2);
        assert_eq!(c.auc, 0.2);

        assert!(matches!(pr_curve(&[0, 0], &[0.1, 0.2]), Err(Error::NoPositives)));
    }

    #[test]
    fn ties_form_one_step() {
        // the tied pair enters together regardless of row order
        let a = pr_curve(&[1, 0, 1], &[0.9, 0.5, 0.5]).unwrap();
        let b = pr_curve(&[1, 1, 0], &[0.9, 0.5, 0.5]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 2);
        assert!((a.auc - (0.5 * 1.0 + 0.5 * (2.0 / 3.0))).abs() < 1e-15);
    }

    #[test]
    fn precision_at_n_cases() {
        assert_eq!(
            precision_at_n(&[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1], 2).unwrap(),
            0.5
        );
        assert_eq!(
            precision_at_n(&[0, 1, 1, 0], &[0.1, 0.9, 0.8, 0.2], 2).unwrap(),
            1.0
        );
        assert_eq!(
            precision_at_n(&[1, 0, 0, 0], &[0.4, 0.3, 0.2, 0.1], 4).unwrap(),
            0.25
        );
        // ties broken by row order: row 1 precedes row 2
        assert_eq!(precision_at_n(&[0, 1, 0], &[0.1, 0.5, 0.5], 1).unwrap(), 1.0);
        assert!(precision_at_n(&[1], &[0.5], 0).is_err());
        assert!(precision_at_n(&[1], &[0.5], 2).is_err());
    }

    fn cm_strategy() -> impl Strategy<Value = ConfusionMatrix> {
        (1u64..500, 0u64..500, 0u64..500, 0u64..500)
            .prop_map(|(tp, fp, tn, fn_)| ConfusionMatrix::new(tp, fp, tn, fn_))
    }

    proptest! {
        #[test]
        fn f_scores_order_with_precision_and_recall(cm in cm_strategy()) {
            let r = report(&cm);
            let (p, rc) = (r.precision.unwrap(), r.recall.unwrap());
            let (f1, fh, f2) = (r.f1.unwrap(), r.f_half.unwrap(), r.f2.unwrap());
            let harmonic = 2.0 / (1.0 / p + 1.0 / rc);
            prop_assert!((f1 - harmonic).abs() < 1e-12);
            let eps = 1e-12;
            if p >= rc {
                prop_assert!(fh + eps >= f1 && f1 + eps >= f2);
            }
            if rc >= p {
                prop_assert!(f2 + eps >= f1 && f1 + eps >= fh);
            }
            if let Some(m) = r.mcc {
                prop_assert!((-1.0 - eps..=1.0 + eps).contains(&m));
            }
        }

        #[test]
        fn report_is_scale_invariant(cm in cm_strategy(), k in 1u64..50) {
            let a = report(&cm);
            let b = report(&ConfusionMatrix::new(cm.tp * k, cm.fp * k, cm.tn * k, cm.fn_ * k));
            let pairs = [
                (a.precision, b.precision), (a.recall, b.recall), (a.f1, b.f1),
                (a.f_half, b.f_half), (a.f2, b.f2), (a.accuracy, b.accuracy), (a.mcc, b.mcc),
            ];
            for (x, y) in pairs {
                match (x, y) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-9),
                    (None, None) => {}
                    _ => prop_assert!(false, "definedness changed under scaling"),
                }
            }
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            data in prop::collection::vec((0u8..2, 0u32..50), 2..80)
        ) {
            let labels: Vec<u8> = data.iter().map(|d| d.0).collect();
            prop_assume!(labels.contains(&1));
            let scores: Vec<f64> = data.iter().map(|d| d.1 as f64 / 10.0).collect();
            let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            let a = auc_pr(&labels, &scores).unwrap();
            let b = auc_pr(&labels, &transformed).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn all_negative_accuracy_is_negative_share(p in 1u64..1000, n in 1u64..1000) {
            let r = report(&ConfusionMatrix::new(0, 0, n, p));
            prop_assert!((r.accuracy.unwrap() - n as f64 / (p + n) as f64).abs() < 1e-12);
            prop_assert!(r.f1.is_none());
        }
    }
}
