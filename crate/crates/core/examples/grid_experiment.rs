//! Size by class distribution grid with the vanilla and scale-tuned approaches.

use imbalanced_gbt::gbt::TrainConfig;
use imbalanced_gbt::harness::{grid_table, run_grid, synth_generate, Approach, GridOptions, SynthSpec};

fn main() -> imbalanced_gbt::Result<()> {
    let source = synth_generate(&SynthSpec {
        n_rows: 20_000,
        class_separation: 1.5,
        seed: 1,
        ..SynthSpec::default()
    })?;
    let opts = GridOptions {
        sizes: vec![1_000, 4_000],
        approaches: vec![Approach::Vanilla, Approach::RsScale],
        base: TrainConfig { n_trees: 30, ..TrainConfig::default() },
        seed: 1,
        ..GridOptions::default()
    };
    let cells = run_grid(&source, &opts)?;
    print!("{}", grid_table(&cells));
    Ok(())
}
