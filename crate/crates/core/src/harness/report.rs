//! Report files: per-experiment CSVs, "mean (std)" tables, a JSON document
//! with everything, and two-column plot data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiments::{DriftRun, GridCell, ImbalanceResult, SamplingArm, SamplingResult};
use crate::error::{Error, Result};
use crate::tuning::format_mean_std;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub grid: Vec<GridCell>,
    pub sampling: Option<SamplingResult>,
    pub imbalance: Option<ImbalanceResult>,
    pub drift: Vec<DriftRun>,
}

impl ExperimentResult {
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty() && self.sampling.is_none() && self.imbalance.is_none() && self.drift.is_empty()
    }
}

pub const GRID_CSV_HEADER: &str = "size,distribution,approach,f1_mean,f1_std,baseline_prc";

pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut s = format!("{GRID_CSV_HEADER}\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.size,
            c.distribution,
            c.approach.name(),
            c.f1_mean,
            c.f1_std,
            c.baseline_prc
        );
    }
    s
}

/// One line per (size, distribution) with a "mean (std)" column per approach.
pub fn grid_table(cells: &[GridCell]) -> String {
    let mut approaches = Vec::new();
    let mut keys = Vec::new();
    for c in cells {
        if !approaches.contains(&c.approach) {
            approaches.push(c.approach);
        }
        if !keys.contains(&(c.size, c.distribution.to_bits())) {
            keys.push((c.size, c.distribution.to_bits()));
        }
    }
    let mut s = String::from("size\tdistribution\tbaseline_prc");
    for a in &approaches {
        let _ = write!(s, "\t{}", a.name());
    }
    s.push('\n');
    for (size, dist_bits) in keys {
        let dist = f64::from_bits(dist_bits);
        let row: Vec<&GridCell> = cells.iter().filter(|c| c.size == size && c.distribution == dist).collect();
        let _ = write!(s, "{size}\t{dist:.2}\t{:.2}", row[0].baseline_prc);
        for a in &approaches {
            match row.iter().find(|c| c.approach == *a) {
                Some(c) => {
                    let _ = write!(s, "\t{}", format_mean_std(c.f1_mean, c.f1_std));
                }
                None => s.push_str("\t-"),
            }
        }
        s.push('\n');
    }
    s
}

pub fn sampling_csv(result: &SamplingResult) -> String {
    let mut s = String::from("distribution,arm,f1,precision,recall,train_rows,train_positives\n");
    for c in &result.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.distribution,
            c.arm.name(),
            c.score.f1,
            c.score.precision,
            c.score.recall,
            c.train_rows,
            c.train_positives
        );
    }
    s
}

/// Distributions down, arms across, F1 to two decimals.
pub fn sampling_table(result: &SamplingResult) -> String {
    let mut s = String::from("distribution");
    for arm in SamplingArm::ALL {
        let _ = write!(s, "\t{}", arm.name());
    }
    s.push('\n');
    let mut dists: Vec<f64> = Vec::new();
    for c in &result.cells {
        if !dists.contains(&c.distribution) {
            dists.push(c.distribution);
        }
    }
    for d in dists {
        let _ = write!(s, "{d:.2}");
        for arm in SamplingArm::ALL {
            match result.cells.iter().find(|c| c.distribution == d && c.arm == arm) {
                Some(c) => {
                    let _ = write!(s, "\t{:.2}", c.score.f1);
                }
                None => s.push_str("\t-"),
            }
        }
        s.push('\n');
    }
    s
}

pub fn imbalance_csv(result: &ImbalanceResult) -> String {
    let mut s = String::from("name,f1_mean,f1_std\n");
    for r in &result.rows {
        let _ = writeln!(s, "{},{},{}", r.name, r.f1_mean, r.f1_std);
    }
    s
}

/// Vanilla plus the best of each objective family.
pub fn imbalance_table(result: &ImbalanceResult) -> String {
    let mut s = String::from("objective\tf1\n");
    let picks = [
        ("vanilla", result.vanilla()),
        ("best_focal", result.best_focal()),
        ("best_weighted", result.best_weighted()),
    ];
    for (label, row) in picks {
        if let Some(r) = row {
            let _ = writeln!(s, "{label} ({})\t{}", r.name, format_mean_std(r.f1_mean, r.f1_std));
        }
    }
    s
}

pub fn drift_csv(runs: &[DriftRun]) -> String {
    let mut s = String::from("mode,section,train_start,test_start,test_end,f1,precision,recall\n");
    for run in runs {
        for sec in &run.sections {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                run.mode.name(),
                sec.index,
                sec.train_start,
                sec.test_start,
                sec.test_end,
                sec.score.f1,
                sec.score.precision,
                sec.score.recall
            );
        }
    }
    s
}

pub fn drift_table(runs: &[DriftRun]) -> String {
    let mut s = String::from("mode\tf1\n");
    for run in runs {
        let _ = writeln!(s, "{}\t{}", run.mode.name(), format_mean_std(run.f1_mean, run.f1_std));
    }
    s
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes every report file for the non-empty parts of `results` into
/// `out_dir` (created if needed) and returns the paths written.
pub fn emit_report(results: &ExperimentResult, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::Empty("experiment results"));
    }
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    if !results.grid.is_empty() {
        write(dir, "grid.csv", &grid_csv(&results.grid), &mut written)?;
        write(dir, "grid_table.txt", &grid_table(&results.grid), &mut written)?;
    }
    if let Some(sampling) = &results.sampling {
        write(dir, "sampling.csv", &sampling_csv(sampling), &mut written)?;
        write(dir, "sampling_table.txt", &sampling_table(sampling), &mut written)?;
        for nc in &sampling.curves {
            let mut s = String::from("recall,precision\n");
            for p in &nc.curve.points {
                let _ = writeln!(s, "{},{}", p.recall, p.precision);
            }
            write(dir, &format!("pr_{}.csv", nc.name), &s, &mut written)?;
        }
    }
    if let Some(imb) = &results.imbalance {
        write(dir, "imbalance.csv", &imbalance_csv(imb), &mut written)?;
        write(dir, "imbalance_table.txt", &imbalance_table(imb), &mut written)?;
    }
    if !results.drift.is_empty() {
        write(dir, "drift.csv", &drift_csv(&results.drift), &mut written)?;
        write(dir, "drift_table.txt", &drift_table(&results.drift), &mut written)?;
        for run in &results.drift {
            let mut s = String::from("section,f1\n");
            for sec in &run.sections {
                let _ = writeln!(s, "{},{}", sec.index, sec.score.f1);
            }
            write(dir, &format!("f1_over_sections_{}.csv", run.mode.name()), &s, &mut written)?;
        }
    }
    let json = serde_json::to_string_pretty(results)?;
    write(dir, "results.json", &json, &mut written)?;
    Ok(written)
}
