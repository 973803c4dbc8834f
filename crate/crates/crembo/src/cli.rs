//! The `crembo` command line.
//!
//! Every setting can come from a flag or from a `key = value` config file
//! given with `--config`; keys are the long flag names. Artifacts embed the
//! resolved settings, the master seed and the data schema.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use crembo_core::eval::{experiment_table, generalization_experiment, robustness_experiment, robustness_table, BigKind, ExperimentConfig};
use crembo_core::learners::{train_forest, ClassWeighting, ForestConfig};
use crembo_core::oracle::ensemble_vote_oracle;
use crembo_core::{compress, BigModel, Compression, CremboConfig, Dataset, LearnerConfig, Model, TreeModel};
use serde::{Deserialize, Serialize};

use crate::config::{Grid, Resolver};
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "crembo", version, about = "Robust compression of big models into shallow decision trees")]
pub struct Cli {
    /// `key = value` settings file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a random forest and write it as JSON.
    TrainForest(TrainForestArgs),
    /// Compress a forest or a probability matrix into a shallow tree.
    Compress(CompressArgs),
    /// Cross-validated accuracy and win rate of BM, ST and MED.
    Evaluate(EvaluateArgs),
    /// Agreement of compact models trained on overlapping data.
    Robustness(EvaluateArgs),
    /// Write a forest's vote probabilities as a matrix CSV.
    ExportOracle(ExportArgs),
    /// Print a tree as nested if/else text.
    Describe(DescribeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Headed CSV; every column but the label column is a feature.
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weighting {
    Balanced,
    Uniform,
}

impl Weighting {
    fn core(self) -> ClassWeighting {
        match self {
            Weighting::Balanced => ClassWeighting::Balanced,
            Weighting::Uniform => ClassWeighting::Uniform,
        }
    }
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::Balanced => "balanced",
            Weighting::Uniform => "uniform",
        })
    }
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Weighting as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Big {
    Forest,
    Matrix,
}

impl std::fmt::Display for Big {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Big::Forest => "forest",
            Big::Matrix => "matrix",
        })
    }
}

impl std::str::FromStr for Big {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Big as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Args)]
pub struct TrainForestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub weighting: Option<Weighting>,
}

/// Settings of the compact tree learners and of the epsilon sweep.
#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub weighting: Option<Weighting>,
    /// Comma-separated trimming levels, e.g. `0,0.01,0.05`.
    #[arg(long)]
    pub trim_grid: Option<Grid>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Forest JSON from `train-forest`.
    #[arg(long, conflicts_with = "matrix")]
    pub forest: Option<String>,
    /// Probability matrix CSV, one row per sample.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Rescale matrix rows to sum to one.
    #[arg(long)]
    pub normalize: bool,
    /// Output directory for tree.json, report.json and tree.txt.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub tree: TreeArgs,
    #[arg(long)]
    pub big: Option<Big>,
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub stratified: Option<bool>,
    /// Held-out share in the robustness protocol.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub forest_depth: Option<usize>,
    /// Dataset name printed in the table; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
    /// Report JSON.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub forest: Option<String>,
    #[arg(long)]
    pub data: Option<String>,
    /// Column to drop from the data, if it is labeled.
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    /// Model JSON from `train-forest` or `compress`.
    #[arg(long)]
    pub model: Option<String>,
    /// Tree to show when the model is a forest.
    #[arg(long)]
    pub tree: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

/// Column and class names of the data a model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<String>,
    pub classes: Vec<String>,
}

impl Schema {
    pub fn of(d: &Dataset) -> Self {
        Schema { columns: d.column_names().to_vec(), classes: d.class_names().to_vec() }
    }
}

/// Envelope shared by every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Artifact<T> {
    pub command: String,
    pub master_seed: u64,
    pub config: BTreeMap<String, String>,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBody {
    pub schema: Schema,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressBody {
    pub schema: Schema,
    pub report: Compression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody<R> {
    pub table: String,
    pub report: R,
}

/// Runs a parsed command line and returns what it prints on stdout.
pub fn run(cli: Cli) -> Result<String> {
    let jobs = cli.jobs;
    let resolver = Resolver::from_path(cli.config.as_deref())?;
    let command = cli.command;
    let work = move || dispatch(command, resolver);
    match jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn dispatch(command: Command, r: Resolver) -> Result<String> {
    match command {
        Command::TrainForest(a) => train_forest_cmd(a, r),
        Command::Compress(a) => compress_cmd(a, r),
        Command::Evaluate(a) => evaluate_cmd(a, r, false),
        Command::Robustness(a) => evaluate_cmd(a, r, true),
        Command::ExportOracle(a) => export_cmd(a, r),
        Command::Describe(a) => describe_cmd(a, r),
    }
}

fn artifact<T>(command: &str, seed: u64, config: BTreeMap<String, String>, body: T) -> Artifact<T> {
    Artifact { command: command.to_owned(), master_seed: seed, config, body }
}

fn load_labeled(r: &mut Resolver, a: DataArgs) -> Result<(Dataset, String, u64)> {
    let data: String = r.required("data", a.data)?;
    let label: String = r.required("label", a.label)?;
    let seed = r.seed(a.seed)?;
    Ok((io::load_csv(Path::new(&data), &label)?, data, seed))
}

fn tree_settings(r: &mut Resolver, a: TreeArgs, seed: u64) -> Result<(LearnerConfig, CremboConfig)> {
    let defaults = LearnerConfig::default();
    let sweep = CremboConfig::default();
    let learner = LearnerConfig {
        max_depth: r.value("max-depth", a.max_depth, || defaults.max_depth)?,
        min_leaf_size: r.value("min-leaf", a.min_leaf, || defaults.min_leaf_size)?,
        class_weighting: r.value("weighting", a.weighting, || Weighting::Balanced)?.core(),
        seed,
    };
    let crembo = CremboConfig {
        trim_grid: r.value("trim-grid", a.trim_grid, || Grid(sweep.trim_grid.clone()))?.0,
        val_fraction: r.value("val-fraction", a.val_fraction, || sweep.val_fraction)?,
        seed,
    };
    learner.validate()?;
    crembo.validate()?;
    Ok((learner, crembo))
}

fn train_forest_cmd(a: TrainForestArgs, mut r: Resolver) -> Result<String> {
    let (d, _, seed) = load_labeled(&mut r, a.data)?;
    let out: String = r.required("out", a.out)?;
    let defaults = ForestConfig::default();
    let cfg = ForestConfig {
        tree_count: r.value("trees", a.trees, || defaults.tree_count)?,
        max_depth: r.value("max-depth", a.max_depth, || defaults.max_depth)?,
        class_weighting: r.value("weighting", a.weighting, || Weighting::Balanced)?.core(),
        seed,
    };
    let config = r.finish()?;
    let forest = train_forest(&d, &cfg)?;
    let n = forest.trees.len();
    let body = ModelBody { schema: Schema::of(&d), model: Model::Forest(forest) };
    io::save_json(Path::new(&out), &artifact("train-forest", seed, config, body))?;
    Ok(format!("wrote {n} trees to {out}\n"))
}

fn load_forest(path: &str) -> Result<(crembo_core::ForestModel, Schema)> {
    let art: Artifact<ModelBody> = io::load_json(Path::new(path))?;
    match art.body.model {
        Model::Forest(f) => Ok((f, art.body.schema)),
        Model::Tree(_) => Err(CliError::Usage(format!("{path}: expected a forest, found a single tree"))),
    }
}

fn compress_cmd(a: CompressArgs, mut r: Resolver) -> Result<String> {
    let (d, _, seed) = load_labeled(&mut r, a.data)?;
    let forest_path: Option<String> = r.optional("forest", a.forest)?;
    let matrix_path: Option<String> = r.optional("matrix", a.matrix)?;
    let normalize = r.value("normalize", a.normalize.then_some(true), || false)?;
    let out: String = r.required("out", a.out)?;
    let (learner, sweep) = tree_settings(&mut r, a.tree, seed)?;
    let config = r.finish()?;

    let forest;
    let matrix;
    let big = match (&forest_path, &matrix_path) {
        (Some(p), None) => {
            forest = load_forest(p)?.0;
            BigModel::Forest(&forest)
        }
        (None, Some(p)) => {
            matrix = io::load_matrix_oracle(Path::new(p), &d, normalize)?;
            BigModel::Matrix(&matrix)
        }
        _ => return Err(CliError::Usage("give exactly one of `--forest` and `--matrix`".into())),
    };
    let report = compress(&d, big, &sweep, &learner)?;

    let dir = Path::new(&out);
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })?;
    let schema = Schema::of(&d);
    let tree = report.result.model.clone();
    let rendering = tree.render(&schema.columns, &schema.classes);
    let table = trace_table(&report);
    io::save_json(
        &dir.join("tree.json"),
        &artifact("compress", seed, config.clone(), ModelBody { schema: schema.clone(), model: Model::Tree(tree) }),
    )?;
    io::save_json(&dir.join("report.json"), &artifact("compress", seed, config, CompressBody { schema, report }))?;
    io::save_text(&dir.join("tree.txt"), &rendering)?;
    Ok(table)
}

/// One line per trimming level: epsilon, depth, validation accuracy.
pub fn trace_table(c: &Compression) -> String {
    let mut out = format!("{:>8}  {:>8}  {:>8}  {:>6}  note\n", "epsilon", "depth", "val acc", "calls");
    for t in &c.result.per_epsilon_trace {
        let depth = t.depth.map_or_else(|| "-".to_owned(), |v| format!("{:.4}", v.0));
        let acc = t.val_accuracy.map_or_else(|| "-".to_owned(), |v| format!("{:.4}", v));
        let mut note = String::new();
        if !t.feasible {
            note.push_str("infeasible");
        } else if t.carried {
            note.push_str("carried");
        }
        if t.epsilon == c.result.chosen_epsilon {
            note.push_str(if note.is_empty() { "chosen" } else { ", chosen" });
        }
        let _ = writeln!(out, "{:>8}  {depth:>8}  {acc:>8}  {:>6}  {note}", t.epsilon, t.learner_calls);
    }
    if let Some(n) = &c.split_note {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

fn evaluate_cmd(a: EvaluateArgs, mut r: Resolver, robustness: bool) -> Result<String> {
    let (d, data_path, seed) = load_labeled(&mut r, a.data)?;
    let big = r.value("big", a.big, || Big::Forest)?;
    let defaults = ExperimentConfig::default();
    let forest_defaults = ForestConfig::default();
    let (tree, crembo) = tree_settings(&mut r, a.tree, seed)?;
    let cfg = ExperimentConfig {
        folds: r.value("folds", a.folds, || defaults.folds)?,
        repeats: r.value("repeats", a.repeats, || defaults.repeats)?,
        seed,
        stratified: r.value("stratified", a.stratified, || defaults.stratified)?,
        test_fraction: if robustness {
            r.value("test-fraction", a.test_fraction, || defaults.test_fraction)?
        } else {
            defaults.test_fraction
        },
        tree,
        crembo,
    };
    let name: String = r.value("name", a.name, || {
        Path::new(&data_path).file_stem().map_or_else(|| data_path.clone(), |s| s.to_string_lossy().into_owned())
    })?;
    let out: Option<String> = r.optional("out", a.out)?;
    let matrix;
    let kind = match big {
        Big::Forest => BigKind::Forest(ForestConfig {
            tree_count: r.value("trees", a.trees, || forest_defaults.tree_count)?,
            max_depth: r.value("forest-depth", a.forest_depth, || forest_defaults.max_depth)?,
            class_weighting: tree.class_weighting,
            seed,
        }),
        Big::Matrix => {
            let path: String = r.required("matrix", a.matrix)?;
            let normalize = r.value("normalize", a.normalize.then_some(true), || false)?;
            matrix = io::load_matrix_oracle(Path::new(&path), &d, normalize)?;
            BigKind::Matrix(&matrix)
        }
    };
    let config = r.finish()?;
    cfg.validate()?;

    let command = if robustness { "robustness" } else { "evaluate" };
    let table = if robustness {
        let report = robustness_experiment(&d, kind, &cfg)?;
        let table = robustness_table(&name, &report);
        if let Some(out) = &out {
            io::save_json(Path::new(out), &artifact(command, seed, config, ReportBody { table: table.clone(), report }))?;
        }
        table
    } else {
        let report = generalization_experiment(&d, kind, &cfg)?;
        let table = experiment_table(&name, &report);
        if let Some(out) = &out {
            io::save_json(Path::new(out), &artifact(command, seed, config, ReportBody { table: table.clone(), report }))?;
        }
        table
    };
    Ok(table)
}

fn export_cmd(a: ExportArgs, mut r: Resolver) -> Result<String> {
    let forest_path: String = r.required("forest", a.forest)?;
    let data: String = r.required("data", a.data)?;
    let label: Option<String> = r.optional("label", a.label)?;
    let out: String = r.required("out", a.out)?;
    r.finish()?;
    let (forest, schema) = load_forest(&forest_path)?;
    let d = io::load_unlabeled(Path::new(&data), label.as_deref(), forest.num_classes)?;
    let oracle = ensemble_vote_oracle(&forest, &d)?;
    io::save_matrix(Path::new(&out), &oracle, &schema.classes)?;
    Ok(format!("wrote {} x {} vote matrix to {out}\n", d.num_rows(), forest.num_classes))
}

fn describe_cmd(a: DescribeArgs, mut r: Resolver) -> Result<String> {
    let path: String = r.required("model", a.model)?;
    let index = r.value("tree", a.tree, || 0usize)?;
    let out: Option<String> = r.optional("out", a.out)?;
    r.finish()?;
    let art: Artifact<ModelBody> = io::load_json(Path::new(&path))?;
    let schema = art.body.schema;
    let tree: TreeModel = match art.body.model {
        Model::Tree(t) => t,
        Model::Forest(f) => {
            let n = f.trees.len();
            f.trees
                .into_iter()
                .nth(index)
                .ok_or_else(|| CliError::Usage(format!("tree {index} out of range; the forest has {n}")))?
        }
    };
    let text = tree.render(&schema.columns, &schema.classes);
    if let Some(out) = out {
        io::save_text(Path::new(&out), &text)?;
    }
    Ok(text)
}
