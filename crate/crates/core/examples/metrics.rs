//! Confusion-matrix metrics and the precision-recall curve on a toy score set.

use imbalanced_gbt::metrics::{self, ConfusionMatrix, REPORT_CSV_HEADER};

fn main() -> imbalanced_gbt::Result<()> {
    // 1 fraud among 20 transactions, flagged together with one false alarm
    let cm = ConfusionMatrix::new(1, 1, 18, 0);
    let r = metrics::report(&cm);
    println!("{REPORT_CSV_HEADER}");
    println!("{}", r.csv_row());

    let labels = [1, 0, 1, 0, 0, 0, 1, 0, 0, 0];
    let scores = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.35, 0.3, 0.2, 0.1];
    let curve = metrics::pr_curve(&labels, &scores)?;
    println!("\nthreshold,recall,precision");
    for p in &curve.points {
        println!("{},{:.3},{:.3}", p.threshold, p.recall, p.precision);
    }
    println!("AUC-PR {:.4}, baseline {:.2}", curve.auc, metrics::baseline_prc(&labels)?);
    println!("precision@3 {:.3}", metrics::precision_at_n(&labels, &scores, 3)?);
    Ok(())
}
