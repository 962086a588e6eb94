//! Compare logistic, class-weighted and focal objectives on skewed data.

use imbalanced_gbt::data::{time_split_fraction, MissingPolicy, TransformState};
use imbalanced_gbt::gbt::{self, Objective, TrainConfig};
use imbalanced_gbt::harness::{synth_generate, SynthSpec};
use imbalanced_gbt::metrics;

fn main() -> imbalanced_gbt::Result<()> {
    let raw = synth_generate(&SynthSpec {
        n_rows: 8_000,
        pos_fraction: 0.05,
        class_separation: 1.5,
        seed: 3,
        ..SynthSpec::default()
    })?;
    let (train, test) = time_split_fraction(&raw, 0.8)?;
    let state = TransformState::fit(&train, MissingPolicy::default())?;
    let (train, test) = (state.apply(&train)?, state.apply(&test)?);

    let objectives = [
        Objective::logistic(),
        Objective::scaled(19.0),
        Objective::weighted(4.0),
        Objective::focal(2.0),
    ];
    println!("objective\tf1\trecall\tprecision");
    for objective in objectives {
        let config = TrainConfig { objective, ..TrainConfig::default() };
        let model = gbt::fit(&train, &config, None)?;
        let proba = model.predict_proba(&test)?;
        let r = metrics::report(&metrics::confusion(&test.labels, &metrics::threshold_labels(&proba, 0.5))?);
        println!(
            "{}\t{:.3}\t{:.3}\t{:.3}",
            objective.tag(),
            r.f1.unwrap_or(0.0),
            r.recall.unwrap_or(0.0),
            r.precision.unwrap_or(0.0)
        );
    }
    Ok(())
}
