//! Fit a booster on synthetic data, save it, reload it and score a holdout.

use imbalanced_gbt::data::{time_split_fraction, MissingPolicy, TransformState};
use imbalanced_gbt::gbt::{self, Ensemble, TrainConfig};
use imbalanced_gbt::harness::{synth_generate, SynthSpec};
use imbalanced_gbt::metrics;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = synth_generate(&SynthSpec {
        n_rows: 5_000,
        pos_fraction: 0.1,
        class_separation: 1.5,
        seed: 7,
        ..SynthSpec::default()
    })?;
    let (train, test) = time_split_fraction(&raw, 0.8)?;
    let state = TransformState::fit(&train, MissingPolicy::default())?;
    let (train, test) = (state.apply(&train)?, state.apply(&test)?);

    let (model, log) = gbt::fit_with_log(&train, &TrainConfig::default(), Some(&test))?;
    let last = log.rounds.last().unwrap();
    println!("{} trees, final train loss {:.4}", model.trees.len(), last.train_loss);

    let dir = std::env::temp_dir().join("igbt-train-predict");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.txt");
    model.save(&path)?;
    let loaded = Ensemble::load(&path)?;

    let proba = loaded.predict_proba(&test)?;
    let pred = metrics::threshold_labels(&proba, 0.5);
    let r = metrics::report(&metrics::confusion(&test.labels, &pred)?);
    println!("saved to {}", path.display());
    println!(
        "holdout F1 {:.3}, AUC-PR {:.3} (baseline {:.3})",
        r.f1.unwrap_or(0.0),
        metrics::auc_pr(&test.labels, &proba)?,
        r.baseline_prc
    );
    Ok(())
}
