//! Cross-validated random search over the hyper-parameter grid.

use imbalanced_gbt::data::MissingPolicy;
use imbalanced_gbt::gbt::TrainConfig;
use imbalanced_gbt::harness::{synth_generate, SynthSpec};
use imbalanced_gbt::tuning::{fit_best, random_search, Param, Preprocess, SearchSpace};

fn main() -> imbalanced_gbt::Result<()> {
    let data = synth_generate(&SynthSpec {
        n_rows: 3_000,
        pos_fraction: 0.25,
        class_separation: 1.5,
        seed: 5,
        ..SynthSpec::default()
    })?;
    // a reduced grid keeps the example quick; SearchSpace::rs_grid() is the full one
    let space = SearchSpace::new(vec![
        (Param::MaxDepth, vec![3.0, 6.0]),
        (Param::LearningRate, vec![0.1, 0.2]),
        (Param::Subsample, vec![0.8, 1.0]),
        (Param::NTrees, vec![50.0, 100.0]),
    ])?;
    let pre = Preprocess::Fit(MissingPolicy::default());
    let result = random_search(&data, &space, &TrainConfig::default(), 6, 3, 42, pre)?;
    print!("{}", result.trial_log_csv());

    let winner = result.winner()?;
    println!("\nwinner: trial {} with mean AUC-PR {:.4}", winner.index, winner.mean_auc_pr);
    let (model, _state) = fit_best(&data, &result, pre)?;
    println!("refit on all rows: {} trees", model.trees.len());
    Ok(())
}
