use imbalanced_gbt::data::{time_split_fraction, MissingPolicy, TransformState};
use imbalanced_gbt::gbt::{self, TrainConfig};
use imbalanced_gbt::harness::{
    drift_experiment, emit_report, imbalance_objective_experiment, run_grid, sampling_experiment, synth_generate,
    ttest_unpaired, Approach, DriftMode, DriftOptions, ExperimentResult, GridOptions, ImbalanceOptions, SamplingOptions,
    SynthSpec, TuneSpec,
};
use imbalanced_gbt::metrics;
use imbalanced_gbt::tuning::{format_mean_std, SearchSpace};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quick() -> TrainConfig {
    TrainConfig {
        n_trees: 10,
        max_depth: 3,
        ..TrainConfig::default()
    }
}

/// Held-out AUC-PR of a vanilla model on data with no class signal,
/// against uniform random scores on the same labels.
#[test]
fn zero_separation_is_indistinguishable_from_random_scoring() {
    let mut model_auc = Vec::new();
    let mut random_auc = Vec::new();
    for seed in 0..6 {
        let raw = synth_generate(&SynthSpec {
            n_rows: 3_000,
            n_numeric: 4,
            n_categorical: 1,
            pos_fraction: 0.3,
            class_separation: 0.0,
            seed,
            ..SynthSpec::default()
        })
        .unwrap();
        let (train, test) = time_split_fraction(&raw, 0.8).unwrap();
        let state = TransformState::fit(&train, MissingPolicy::default()).unwrap();
        let model = gbt::fit(&state.apply(&train).unwrap(), &TrainConfig::default(), None).unwrap();
        let proba = model.predict_proba(&state.apply(&test).unwrap()).unwrap();
        model_auc.push(metrics::auc_pr(&test.labels, &proba).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut labels = test.labels.clone();
        labels.shuffle(&mut rng);
        let scores: Vec<f64> = labels.iter().map(|_| rng.random()).collect();
        random_auc.push(metrics::auc_pr(&labels, &scores).unwrap());
    }
    let t = ttest_unpaired(&model_auc, &random_auc).unwrap();
    assert!(t.p > 0.05, "model {model_auc:?} vs random {random_auc:?}: p {}", t.p);
    let mean = model_auc.iter().sum::<f64>() / model_auc.len() as f64;
    assert!((mean - 0.3).abs() < 0.05, "{mean}");
}

#[test]
fn learnable_data_beats_the_baseline_everywhere() {
    let source = synth_generate(&SynthSpec {
        n_rows: 8_000,
        seed: 2,
        ..SynthSpec::default()
    })
    .unwrap();
    let opts = GridOptions {
        sizes: vec![4_000],
        approaches: vec![Approach::Vanilla],
        seed: 2,
        ..GridOptions::default()
    };
    for cell in run_grid(&source, &opts).unwrap() {
        assert_eq!(cell.baseline_prc, cell.distribution);
        let t = cell.vs_baseline.unwrap();
        assert!(t.p < 0.05 && t.t > 0.0, "{} {:?}", cell.distribution, cell.fold_f1);
    }
}

#[test]
fn every_report_file_is_written() {
    let source = synth_generate(&SynthSpec {
        n_rows: 1_200,
        n_numeric: 3,
        n_categorical: 1,
        seed: 8,
        ..SynthSpec::default()
    })
    .unwrap();
    let tiny_tune = TuneSpec {
        space: SearchSpace::scale_grid(),
        n_trials: 2,
        k: 2,
    };
    let grid = run_grid(
        &source,
        &GridOptions {
            sizes: vec![200],
            distributions: vec![0.5, 0.25],
            approaches: vec![Approach::Vanilla, Approach::RsScale],
            base: quick(),
            ..GridOptions::default()
        },
    )
    .unwrap();
    let sampling = sampling_experiment(
        &source,
        &SamplingOptions {
            distributions: vec![0.5, 0.45, 0.25, 0.05],
            size: 600,
            base: quick(),
            tune: Some(tiny_tune.clone()),
            ..SamplingOptions::default()
        },
    )
    .unwrap();
    let imbalance = imbalance_objective_experiment(
        &source.slice(0..400),
        &ImbalanceOptions {
            base: quick(),
            ..ImbalanceOptions::default()
        },
    )
    .unwrap();
    let drift_opts = DriftOptions {
        train_window: 400,
        test_window: 100,
        base: quick(),
        tune: None,
        ..DriftOptions::default()
    };
    let drift = vec![
        drift_experiment(&source, DriftMode::MovingWindow, &drift_opts).unwrap(),
        drift_experiment(&source, DriftMode::TrainOnce, &drift_opts).unwrap(),
    ];
    assert_eq!(imbalance.rows.len(), 8);
    assert_eq!(sampling.cells.len(), 16);

    let results = ExperimentResult {
        grid,
        sampling: Some(sampling),
        imbalance: Some(imbalance),
        drift,
    };
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&results, dir.path()).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for expected in [
        "grid.csv",
        "grid_table.txt",
        "sampling.csv",
        "sampling_table.txt",
        "pr_vanilla_0.05.csv",
        "pr_sampling_vanilla_0.05.csv",
        "imbalance.csv",
        "imbalance_table.txt",
        "drift.csv",
        "drift_table.txt",
        "f1_over_sections_moving_window.csv",
        "f1_over_sections_train_once.csv",
        "results.json",
    ] {
        assert!(names.iter().any(|n| n == expected), "{expected} missing from {names:?}");
    }
    let table = std::fs::read_to_string(dir.path().join("sampling_table.txt")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.lines().skip(1).all(|l| l.split('\t').count() == 5));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(json["drift"].as_array().unwrap().len(), 2);
    let back: ExperimentResult = serde_json::from_value(json).unwrap();
    assert_eq!(back, results);

    assert_eq!(format_mean_std(0.432, 0.0271), "0.43 (0.03)");
    assert_eq!(format_mean_std(0.59, 0.03), "0.59 (0.03)");
}

#[test]
fn unwritable_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let run = drift_experiment(
        &synth_generate(&SynthSpec { n_rows: 900, seed: 1, ..SynthSpec::default() }).unwrap(),
        DriftMode::TrainOnce,
        &DriftOptions {
            train_window: 400,
            test_window: 100,
            base: quick(),
            tune: None,
            ..DriftOptions::default()
        },
    )
    .unwrap();
    let results = ExperimentResult {
        drift: vec![run],
        ..ExperimentResult::default()
    };
    assert!(emit_report(&results, blocker.join("sub")).is_err());
}
