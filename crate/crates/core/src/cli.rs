//! Command-line front end: argument parsing, the TOML run configuration and
//! one function per subcommand.
//!
//! Settings resolve in three layers: built-in defaults, then the `--config`
//! file, then flags. Every subcommand writes into `--out` and returns the
//! paths it wrote.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, load_prepared_csv, time_split_fraction, write_csv, Dataset, FeatureSchema, MissingPolicy, TransformState, STATE_VERSION};
use crate::error::{Error, Result};
use crate::gbt::{self, Ensemble, TrainConfig, MODEL_FORMAT_VERSION};
use crate::harness::{
    drift_experiment, emit_report, imbalance_objective_experiment, run_grid, sampling_experiment, synth_generate, Approach,
    Drift, DriftMode, DriftOptions, ExperimentResult, GridOptions, ImbalanceOptions, SamplingOptions, SynthSpec, TuneSpec,
};
use crate::metrics;
use crate::tuning::{fit_best, random_search, Preprocess};

/// Version line printed by `--version`.
pub fn version_string() -> String {
    format!(
        "{} (model format {MODEL_FORMAT_VERSION}, transform state {STATE_VERSION})",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Debug, Parser)]
#[command(name = "igbt", about = "Gradient-boosted trees for imbalanced binary classification")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time-split a raw CSV, fit the transforms on the training part and
    /// write prepared train/test files plus the transform state.
    Prepare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        train_fraction: Option<f64>,
    },
    /// Fit a model and write it with its per-round log.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Input is raw: fit and save a transform state first.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        params: TrainFlags,
    },
    /// Score a CSV with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Transform state to apply to raw input.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Metric report for a scores file against true labels.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        /// CSV holding the true labels.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "label")]
        label_column: String,
    },
    /// Random or exhaustive search with k-fold cross-validation.
    Tune {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        raw: bool,
        #[arg(long, value_enum)]
        space: Option<SpaceKind>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        folds: Option<usize>,
        #[command(flatten)]
        params: TrainFlags,
    },
    /// Run one of the experiments and write its report files.
    Experiment {
        #[arg(long, value_enum)]
        kind: ExperimentKind,
        /// Drift protocol(s) to run.
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Raw source CSV; synthetic data is generated when absent.
        #[arg(long, requires = "schema")]
        data: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[command(flatten)]
        params: TrainFlags,
    },
}

/// Booster parameters settable from the command line.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub colsample_bytree: Option<f64>,
    #[arg(long)]
    pub scale_pos_weight: Option<f64>,
    #[arg(long)]
    pub weighted_alpha: Option<f64>,
    #[arg(long)]
    pub focal_gamma: Option<f64>,
}

impl TrainFlags {
    fn apply(&self, c: &mut TrainConfig) {
        if let Some(v) = self.max_depth {
            c.max_depth = v;
        }
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.n_trees {
            c.n_trees = v;
        }
        if let Some(v) = self.subsample {
            c.subsample = v;
        }
        if let Some(v) = self.colsample_bytree {
            c.colsample_bytree = v;
        }
        if let Some(v) = self.scale_pos_weight {
            c.objective.scale_pos_weight = v;
        }
        if self.weighted_alpha.is_some() {
            c.objective.weighted_alpha = self.weighted_alpha;
        }
        if self.focal_gamma.is_some() {
            c.objective.focal_gamma = self.focal_gamma;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Rs,
    Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Grid,
    Sampling,
    Imbalance,
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Moving,
    Once,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<DriftMode> {
        match self {
            ModeArg::Moving => vec![DriftMode::MovingWindow],
            ModeArg::Once => vec![DriftMode::TrainOnce],
            ModeArg::Both => vec![DriftMode::MovingWindow, DriftMode::TrainOnce],
        }
    }
}

/// Settings file. Every field is optional and falls back to the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub train: TrainConfig,
    pub missing: MissingPolicy,
    pub train_fraction: f64,
    pub tune: TuneConfig,
    pub grid: GridConfig,
    pub sampling: SamplingConfig,
    pub imbalance: ImbalanceConfig,
    pub drift: DriftConfig,
    /// Synthetic source for experiments run without `--data`.
    pub synth: Option<SynthSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            out: PathBuf::from("out"),
            train: TrainConfig::default(),
            missing: MissingPolicy::default(),
            train_fraction: 0.8,
            tune: TuneConfig::default(),
            grid: GridConfig::default(),
            sampling: SamplingConfig::default(),
            imbalance: ImbalanceConfig::default(),
            drift: DriftConfig::default(),
            synth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneConfig {
    pub space: SpaceKind,
    pub trials: usize,
    pub folds: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            space: SpaceKind::Rs,
            trials: 25,
            folds: 5,
        }
    }
}

impl TuneConfig {
    fn spec(&self) -> TuneSpec {
        match self.space {
            SpaceKind::Rs => TuneSpec::rs(self.trials, self.folds),
            SpaceKind::Scale => TuneSpec::scale(self.folds),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub sizes: Vec<usize>,
    pub distributions: Vec<f64>,
    pub approaches: Vec<Approach>,
    pub rs_trials: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridOptions::default();
        Self {
            sizes: g.sizes,
            distributions: g.distributions,
            approaches: g.approaches,
            rs_trials: g.rs_trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub distributions: Vec<f64>,
    pub size: usize,
    /// Run the tuned arms with the `[tune]` settings.
    pub tuned: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let s = SamplingOptions::default();
        Self {
            distributions: s.distributions,
            size: s.size,
            tuned: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImbalanceConfig {
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub folds: usize,
}

impl Default for ImbalanceConfig {
    fn default() -> Self {
        let i = ImbalanceOptions::default();
        Self {
            gammas: i.gammas,
            alphas: i.alphas,
            folds: i.k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftConfig {
    pub train_window: usize,
    pub test_window: usize,
    pub n_sections: usize,
    /// Exhaust the scale_pos_weight grid on every training window.
    pub tuned: bool,
    pub folds: usize,
    /// Shift injected into the synthetic stream.
    pub drift: Option<Drift>,
}

impl Default for DriftConfig {
    fn default() -> Self {
        let d = DriftOptions::default();
        Self {
            train_window: d.train_window,
            test_window: d.test_window,
            n_sections: d.n_sections,
            tuned: true,
            folds: 5,
            drift: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    fn preprocess(&self) -> Preprocess {
        Preprocess::Fit(self.missing)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, or a `--help`/`--version` request.
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Run(#[from] Error),
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> std::result::Result<Vec<PathBuf>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = Cli::command().version(version_string()).try_get_matches_from(args)?;
    let cli = Cli::from_arg_matches(&matches)?;
    Ok(execute(cli)?)
}

/// Resolves the configuration layers and runs the parsed command.
pub fn execute(cli: Cli) -> Result<Vec<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.train.seed = cfg.seed;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, cfg))
}

fn dispatch(command: &Command, mut cfg: RunConfig) -> Result<Vec<PathBuf>> {
    match command {
        Command::Prepare {
            input,
            schema,
            train_fraction,
        } => {
            if let Some(f) = train_fraction {
                cfg.train_fraction = *f;
            }
            cmd_prepare(input, schema, &cfg)
        }
        Command::Train {
            train,
            schema,
            raw,
            params,
        } => {
            params.apply(&mut cfg.train);
            cmd_train(train, schema, *raw, &cfg)
        }
        Command::Predict {
            model,
            data,
            schema,
            state,
            threshold,
        } => cmd_predict(model, data, schema, state.as_deref(), *threshold, &cfg),
        Command::Evaluate {
            scores,
            labels,
            label_column,
        } => cmd_evaluate(scores, labels, label_column, &cfg),
        Command::Tune {
            train,
            schema,
            raw,
            space,
            trials,
            folds,
            params,
        } => {
            params.apply(&mut cfg.train);
            if let Some(s) = space {
                cfg.tune.space = *s;
            }
            if let Some(t) = trials {
                cfg.tune.trials = *t;
            }
            if let Some(k) = folds {
                cfg.tune.folds = *k;
            }
            cmd_tune(train, schema, *raw, &cfg)
        }
        Command::Experiment {
            kind,
            mode,
            data,
            schema,
            params,
        } => {
            params.apply(&mut cfg.train);
            let source = match (data, schema) {
                (Some(d), Some(s)) => Some((d.as_path(), s.as_path())),
                _ => None,
            };
            cmd_experiment(*kind, *mode, source, &cfg)
        }
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
        ))
    }
}

fn load_schema(path: &Path) -> Result<FeatureSchema> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FeatureSchema::from_json_str(&s)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    Ok(&cfg.out)
}

fn write_file(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn save_dataset(path: PathBuf, data: &Dataset, written: &mut Vec<PathBuf>) -> Result<()> {
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_csv(std::io::BufWriter::new(file), data)?;
    written.push(path);
    Ok(())
}

/// Reads raw or already prepared input.
fn load_input(path: &Path, schema: &FeatureSchema, raw: bool) -> Result<Dataset> {
    if raw {
        load_csv(path, schema)
    } else {
        load_prepared_csv(path, schema)
    }
}

pub fn cmd_prepare(input: &Path, schema: &Path, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    require_file(input)?;
    require_file(schema)?;
    let schema = load_schema(schema)?;
    let data = load_csv(input, &schema)?;
    let (train, test) = time_split_fraction(&data, cfg.train_fraction)?;
    let state = TransformState::fit(&train, cfg.missing)?;
    let dir = out_dir(cfg)?;
    let mut written = Vec::new();
    save_dataset(dir.join("train.csv"), &state.apply(&train)?, &mut written)?;
    save_dataset(dir.join("test.csv"), &state.apply(&test)?, &mut written)?;
    let path = dir.join("transform_state.json");
    state.save(&path)?;
    written.push(path);
    Ok(written)
}

pub fn cmd_train(train: &Path, schema: &Path, raw: bool, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    require_file(train)?;
    require_file(schema)?;
    cfg.train.validate()?;
    let schema = load_schema(schema)?;
    let mut data = load_input(train, &schema, raw)?;
    let state = if raw {
        let s = TransformState::fit(&data, cfg.missing)?;
        data = s.apply(&data)?;
        Some(s)
    } else {
        None
    };
    let (model, log) = gbt::fit_with_log(&data, &cfg.train, None)?;
    let dir = out_dir(cfg)?;
    let mut written = Vec::new();
    let path = dir.join("model.txt");
    model.save(&path)?;
    written.push(path);
    write_file(dir.join("fit_log.csv"), &log.to_csv(), &mut written)?;
    if let Some(s) = state {
        let path = dir.join("transform_state.json");
        s.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_predict(model: &Path, data: &Path, schema: &Path, state: Option<&Path>, threshold: f64, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    require_file(model)?;
    require_file(data)?;
    require_file(schema)?;
    if let Some(s) = state {
        require_file(s)?;
    }
    let model = Ensemble::load(model)?;
    let schema = load_schema(schema)?;
    let rows = match state {
        Some(s) => TransformState::load(s)?.apply(&load_csv(data, &schema)?)?,
        None => load_prepared_csv(data, &schema)?,
    };
    let proba = model.predict_proba(&rows)?;
    let labels = metrics::threshold_labels(&proba, threshold);
    let mut csv = String::from("row,probability,label\n");
    for (i, (p, l)) in proba.iter().zip(&labels).enumerate() {
        csv.push_str(&format!("{i},{p},{l}\n"));
    }
    let mut written = Vec::new();
    write_file(out_dir(cfg)?.join("scores.csv"), &csv, &mut written)?;
    Ok(written)
}

fn read_column(path: &Path, name: &str) -> Result<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let idx = headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::ColumnMismatch(format!("{} has no column {name:?}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        out.push(rec?.get(idx).unwrap_or("").to_string());
    }
    Ok(out)
}

fn parse_labels(values: &[String]) -> Result<Vec<u8>> {
    values
        .iter()
        .enumerate()
        .map(|(row, v)| match v.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(Error::NonBinaryLabel {
                row,
                value: other.to_string(),
            }),
        })
        .collect()
}

pub fn cmd_evaluate(scores: &Path, labels: &Path, label_column: &str, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    require_file(scores)?;
    require_file(labels)?;
    let predicted = parse_labels(&read_column(scores, "label")?)?;
    let proba: Vec<f64> = read_column(scores, "probability")?
        .iter()
        .enumerate()
        .map(|(row, v)| {
            v.trim().parse::<f64>().map_err(|_| Error::NumericParse {
                column: "probability".into(),
                row,
                value: v.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let truth = parse_labels(&read_column(labels, label_column)?)?;
    let cm = metrics::confusion(&truth, &predicted)?;
    let report = metrics::report(&cm);
    let curve = metrics::pr_curve(&truth, &proba)?;
    let auc = metrics::auc_pr(&truth, &proba)?;

    let dir = out_dir(cfg)?;
    let mut written = Vec::new();
    let csv = format!("{},auc_pr\n{},{auc}\n", metrics::REPORT_CSV_HEADER, report.csv_row());
    write_file(dir.join("metrics.csv"), &csv, &mut written)?;
    let text = format!(
        "tp={} fp={} tn={} fn={}\n{report}\nauc_pr {auc:.4}\n",
        cm.tp, cm.fp, cm.tn, cm.fn_
    );
    write_file(dir.join("metrics.txt"), &text, &mut written)?;
    write_file(dir.join("pr_curve.csv"), &curve.to_csv(), &mut written)?;
    Ok(written)
}

pub fn cmd_tune(train: &Path, schema: &Path, raw: bool, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    require_file(train)?;
    require_file(schema)?;
    cfg.train.validate()?;
    let schema = load_schema(schema)?;
    let data = load_input(train, &schema, raw)?;
    let preprocess = if raw { cfg.preprocess() } else { Preprocess::None };
    let spec = cfg.tune.spec();
    let cv = random_search(&data, &spec.space, &cfg.train, spec.n_trials, spec.k, cfg.seed, preprocess)?;
    let (model, state) = fit_best(&data, &cv, preprocess)?;

    let dir = out_dir(cfg)?;
    let mut written = Vec::new();
    write_file(dir.join("trial_log.csv"), &cv.trial_log_csv(), &mut written)?;
    let path = dir.join("best_model.txt");
    model.save(&path)?;
    written.push(path);
    if let Some(s) = state {
        let path = dir.join("transform_state.json");
        s.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// Synthetic source sized for `kind` unless the configuration supplies one.
fn synthetic_source(kind: ExperimentKind, cfg: &RunConfig) -> Result<Dataset> {
    let spec = match cfg.synth {
        Some(s) => s,
        None => {
            let n_rows = match kind {
                ExperimentKind::Grid => {
                    // enough of each class for the largest size at any distribution
                    let max = cfg.grid.sizes.iter().copied().max().unwrap_or(0);
                    2 * max
                }
                ExperimentKind::Sampling => 2 * cfg.sampling.size,
                ExperimentKind::Imbalance => 768,
                ExperimentKind::Drift => cfg.drift.train_window + cfg.drift.n_sections * cfg.drift.test_window,
            };
            let pos_fraction = match kind {
                ExperimentKind::Imbalance => 0.35,
                ExperimentKind::Drift => 0.45,
                _ => 0.5,
            };
            SynthSpec {
                n_rows,
                pos_fraction,
                drift: cfg.drift.drift.filter(|_| kind == ExperimentKind::Drift),
                seed: cfg.seed,
                ..SynthSpec::default()
            }
        }
    };
    synth_generate(&spec)
}

pub fn cmd_experiment(kind: ExperimentKind, mode: ModeArg, source: Option<(&Path, &Path)>, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = match source {
        Some((data, schema)) => {
            require_file(data)?;
            require_file(schema)?;
            load_csv(data, &load_schema(schema)?)?
        }
        None => synthetic_source(kind, cfg)?,
    };
    cfg.train.validate()?;
    let mut result = ExperimentResult::default();
    match kind {
        ExperimentKind::Grid => {
            let opts = GridOptions {
                sizes: cfg.grid.sizes.clone(),
                distributions: cfg.grid.distributions.clone(),
                approaches: cfg.grid.approaches.clone(),
                base: cfg.train,
                rs_trials: cfg.grid.rs_trials,
                preprocess: cfg.preprocess(),
                seed: cfg.seed,
            };
            result.grid = run_grid(&data, &opts)?;
        }
        ExperimentKind::Sampling => {
            let opts = SamplingOptions {
                distributions: cfg.sampling.distributions.clone(),
                size: cfg.sampling.size,
                train_fraction: cfg.train_fraction,
                base: cfg.train,
                tune: cfg.sampling.tuned.then(|| cfg.tune.spec()),
                preprocess: cfg.preprocess(),
                seed: cfg.seed,
            };
            result.sampling = Some(sampling_experiment(&data, &opts)?);
        }
        ExperimentKind::Imbalance => {
            let opts = ImbalanceOptions {
                gammas: cfg.imbalance.gammas.clone(),
                alphas: cfg.imbalance.alphas.clone(),
                k: cfg.imbalance.folds,
                base: cfg.train,
                preprocess: cfg.preprocess(),
                seed: cfg.seed,
            };
            result.imbalance = Some(imbalance_objective_experiment(&data, &opts)?);
        }
        ExperimentKind::Drift => {
            let opts = DriftOptions {
                train_window: cfg.drift.train_window,
                test_window: cfg.drift.test_window,
                n_sections: cfg.drift.n_sections,
                base: cfg.train,
                tune: cfg.drift.tuned.then(|| TuneSpec::scale(cfg.drift.folds)),
                preprocess: cfg.preprocess(),
                seed: cfg.seed,
            };
            for m in mode.modes() {
                result.drift.push(drift_experiment(&data, m, &opts)?);
            }
        }
    }
    emit_report(&result, &cfg.out)
}
