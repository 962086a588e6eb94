//! Schema, CSV loading, time split and the saved transform state.

use imbalanced_gbt::data::{read_csv, time_split_fraction, ColumnSpec, FeatureSchema, MissingPolicy, TransformState};

const CSV: &str = "\
t,amount,merchant,label
1,12.5,grocery,0
2,230.0,travel,1
3,,grocery,0
4,18.0,fuel,0
5,950.0,travel,1
6,22.0,grocery,0
7,14.0,pharmacy,0
8,410.0,travel,1
9,31.0,fuel,0
10,27.0,casino,0
";

fn main() -> imbalanced_gbt::Result<()> {
    let schema = FeatureSchema::new(
        vec![ColumnSpec::numeric("amount"), ColumnSpec::categorical("merchant")],
        "label",
        Some("t".into()),
    )?;
    let raw = read_csv(CSV.as_bytes(), &schema)?;
    let (train, test) = time_split_fraction(&raw, 0.8)?;
    println!("train {} rows, test {} rows, {} missing cells", train.n_rows(), test.n_rows(), raw.missing_count());

    let state = TransformState::fit(&train, MissingPolicy::default())?;
    let prepared = state.apply(&test)?;
    for row in 0..prepared.n_rows() {
        println!("test row {row}: {:?} {:?}", prepared.cell(row, 0), prepared.cell(row, 1));
    }
    println!("\n{}", state.to_json()?);
    Ok(())
}
