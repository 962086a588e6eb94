//! Moving-window retraining against a model trained once, on a stream whose
//! feature distribution shifts partway through.

use imbalanced_gbt::gbt::TrainConfig;
use imbalanced_gbt::harness::{drift_experiment, drift_table, synth_generate, Drift, DriftMode, DriftOptions, SynthSpec};

fn main() -> imbalanced_gbt::Result<()> {
    let opts = DriftOptions {
        train_window: 4_000,
        test_window: 1_000,
        base: TrainConfig { n_trees: 30, ..TrainConfig::default() },
        tune: None,
        ..DriftOptions::default()
    };
    let stream = synth_generate(&SynthSpec {
        n_rows: opts.required_rows(),
        n_numeric: 6,
        n_categorical: 1,
        pos_fraction: 0.45,
        class_separation: 2.5,
        drift: Some(Drift { onset: 6_500, shift: 2.0 }),
        seed: 4,
        ..SynthSpec::default()
    })?;
    let runs = vec![
        drift_experiment(&stream, DriftMode::MovingWindow, &opts)?,
        drift_experiment(&stream, DriftMode::TrainOnce, &opts)?,
    ];
    print!("{}", drift_table(&runs));
    for run in &runs {
        let f1: Vec<String> = run.sections.iter().map(|s| format!("{:.3}", s.score.f1)).collect();
        println!("{:>13}: {}", run.mode.name(), f1.join(" "));
    }
    Ok(())
}
