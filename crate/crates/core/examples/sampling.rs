//! Rebalance a skewed training set three ways and inspect the audit log.

use imbalanced_gbt::harness::{synth_generate, SynthSpec};
use imbalanced_gbt::sampling::{resample, SamplingPlan, Strategy};

fn main() -> imbalanced_gbt::Result<()> {
    let train = synth_generate(&SynthSpec {
        n_rows: 2_000,
        pos_fraction: 0.05,
        seed: 11,
        ..SynthSpec::default()
    })?;
    println!("input: {} rows, {} positives", train.n_rows(), train.n_positives());
    for strategy in [Strategy::Under, Strategy::Over, Strategy::CombinedPreserveSize] {
        let out = resample(&train, &SamplingPlan::new(strategy, 1))?;
        let dropped = out.multiplicity.iter().filter(|&&m| m == 0).count();
        let repeated = out.multiplicity.iter().filter(|&&m| m > 1).count();
        println!(
            "{strategy:?}: {} rows, {} positives, {dropped} inputs dropped, {repeated} repeated",
            out.data.n_rows(),
            out.data.n_positives()
        );
    }
    let audit = resample(&train, &SamplingPlan::new(Strategy::CombinedPreserveSize, 1))?.audit_csv();
    println!("\naudit head:\n{}", audit.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}
