//! Experiment protocols: cross-validated generalization with win rates,
//! fold-omission agreement, and the oracle perturbation probe.

mod breakdown;
mod table;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::crembo::{compress, BigModel, CremboConfig};
use crate::data::{kfold, split_indices, ClassId, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::learners::{train_forest, train_standard_tree, ForestConfig, LearnerConfig};
use crate::model::{accuracy, Classifier, ForestModel, TreeModel};
use crate::oracle::{OracleSource, TableOracle};
use crate::seed::{self, keys};
use crate::util::par_map;

pub use breakdown::{breakdown_probe, default_delta_grid, BreakdownReport, PerturbationHit};
pub use table::{experiment_table, robustness_table};

pub const BM: &str = "BM";
pub const ST: &str = "ST";
pub const MED: &str = "MED";

/// The compact models compared by every protocol, in report order.
pub const COMPACT_MODELS: [&str; 3] = [BM, ST, MED];

/// Source of the big model in a protocol.
#[derive(Debug, Clone, Copy)]
pub enum BigKind<'a> {
    /// Train a forest on each round's training rows.
    Forest(ForestConfig),
    /// A fixed probability matrix over all rows of the dataset. Its argmax
    /// stands in for the big model's predictions.
    Matrix(&'a TableOracle),
}

impl BigKind<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            BigKind::Forest(_) => "RF",
            BigKind::Matrix(_) => "MATRIX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub stratified: bool,
    /// Held-out share of the robustness protocol's test split.
    pub test_fraction: f64,
    pub tree: LearnerConfig,
    pub crembo: CremboConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            folds: 10,
            repeats: 20,
            seed: 0,
            stratified: true,
            test_fraction: 0.15,
            tree: LearnerConfig::default(),
            crembo: CremboConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::FoldCountExceedsRows { folds: self.folds, rows: 0 });
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidFraction(self.test_fraction));
        }
        self.tree.validate()?;
        self.crembo.validate()
    }

    fn repeat_seed(&self, r: usize) -> u64 {
        seed::derive(self.seed, &[keys::REPEAT, r as u64])
    }
}

/// Accuracies and compact models of one cross-validation round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FoldOutcome {
    pub repeat: usize,
    pub fold_index: usize,
    pub accuracies: BTreeMap<String, f64>,
    pub models: BTreeMap<String, TreeModel>,
    pub med_epsilon: f64,
    /// Rows (dataset indices) the median tree was fitted and validated on.
    pub med_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub big_model: String,
    pub mean_accuracy: BTreeMap<String, f64>,
    /// Percentage of rounds won among the compact models.
    pub win_rate: BTreeMap<String, f64>,
    pub repeats: usize,
    pub folds: usize,
    pub seed_list: Vec<u64>,
    pub rounds: Vec<FoldOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RobustnessReport {
    pub big_model: String,
    /// Mean pairwise test-set agreement, averaged over repeats.
    pub agreement: BTreeMap<String, f64>,
    pub per_repeat: Vec<BTreeMap<String, f64>>,
    pub repeats: usize,
    pub seed_list: Vec<u64>,
}

/// Fraction of positions where two prediction vectors agree.
pub fn agreement(a: &[ClassId], b: &[ClassId]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64)
}

/// Win percentages per model from per-round scores (`rounds[r][model]`).
///
/// Each round awards one point, shared equally among the models tied for
/// the highest score.
pub fn win_rates(rounds: &[Vec<f64>]) -> Vec<f64> {
    let width = rounds.first().map_or(0, Vec::len);
    let mut wins = alloc::vec![0.0; width];
    for scores in rounds {
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == top).collect();
        for &w in &winners {
            wins[w] += 1.0 / winners.len() as f64;
        }
    }
    let n = rounds.len().max(1) as f64;
    wins.into_iter().map(|w| 100.0 * w / n).collect()
}

enum Big {
    Forest(ForestModel),
    Matrix,
}

/// Everything trained on one round's rows.
struct Round {
    big: Big,
    bm: TreeModel,
    st: TreeModel,
    med: TreeModel,
    med_epsilon: f64,
    med_rows: Vec<usize>,
}

impl Round {
    fn big_predictions(&self, d: &Dataset, rows: &[usize], kind: &BigKind<'_>) -> Result<Vec<ClassId>> {
        match (&self.big, kind) {
            (Big::Forest(f), _) => f.predict(&d.subset(rows)),
            (Big::Matrix, BigKind::Matrix(m)) => Ok(matrix_argmax(m, rows)),
            (Big::Matrix, BigKind::Forest(_)) => unreachable!("round and kind disagree"),
        }
    }
}

fn matrix_argmax(m: &TableOracle, rows: &[usize]) -> Vec<ClassId> {
    rows.iter()
        .map(|&r| {
            let p = m.row(r);
            let mut best = 0;
            for c in 1..p.len() {
                if p[c] > p[best] {
                    best = c;
                }
            }
            ClassId(best)
        })
        .collect()
}

fn fit_round(d: &Dataset, train_rows: &[usize], kind: &BigKind<'_>, cfg: &ExperimentConfig, round_seed: u64) -> Result<Round> {
    let train = d.subset(train_rows);
    let tree_cfg = LearnerConfig { seed: round_seed, ..cfg.tree };
    let crembo_cfg = CremboConfig { seed: seed::derive(round_seed, &[keys::VALIDATION]), ..cfg.crembo.clone() };
    let bm = train_standard_tree(&train, &tree_cfg)?;
    let (big, teacher, compression) = match kind {
        BigKind::Forest(fc) => {
            let forest = train_forest(&train, &ForestConfig { seed: seed::derive(round_seed, &[keys::FOREST]), ..*fc })?;
            let teacher = forest.predict(&train)?;
            let compression = compress(&train, BigModel::Forest(&forest), &crembo_cfg, &tree_cfg)?;
            (Big::Forest(forest), teacher, compression)
        }
        BigKind::Matrix(m) => {
            let restricted = TableOracle::restrict(*m, train_rows);
            let teacher = matrix_argmax(m, train_rows);
            let compression = compress(&train, BigModel::Matrix(&restricted), &crembo_cfg, &tree_cfg)?;
            (Big::Matrix, teacher, compression)
        }
    };
    let st = train_standard_tree(&train.with_labels(teacher)?, &tree_cfg)?;
    let mut med_rows: Vec<usize> = compression
        .train_rows
        .iter()
        .chain(&compression.val_rows)
        .map(|&i| train_rows[i])
        .collect();
    med_rows.sort_unstable();
    Ok(Round {
        big,
        bm,
        st,
        med: compression.result.model,
        med_epsilon: compression.result.chosen_epsilon,
        med_rows,
    })
}

fn check_kind(d: &Dataset, kind: &BigKind<'_>) -> Result<()> {
    d.require_labels()?;
    if let BigKind::Matrix(m) = kind {
        if m.num_rows() != d.num_rows() || m.num_classes() != d.num_classes() {
            return Err(Error::ShapeMismatch {
                rows: d.num_rows(),
                classes: d.num_classes(),
                found_rows: m.num_rows(),
                found_cols: m.num_classes(),
            });
        }
    }
    Ok(())
}

/// Repeated k-fold comparison of the benchmark, student and median trees.
///
/// In each round the big model and the benchmark tree train on the training
/// folds, the student tree trains on the big model's predictions there, and
/// the median tree comes from [`compress`] on the same rows. All are scored
/// on the held-out fold.
pub fn generalization_experiment(d: &Dataset, kind: BigKind<'_>, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    check_kind(d, &kind)?;
    let seed_list: Vec<u64> = (0..cfg.repeats).map(|r| cfg.repeat_seed(r)).collect();
    let mut jobs = Vec::new();
    for (r, &rs) in seed_list.iter().enumerate() {
        for (j, (train, test)) in kfold(d, cfg.folds, seed::derive(rs, &[keys::FOLDS]), cfg.stratified)?.into_iter().enumerate() {
            jobs.push((r, j, seed::derive(rs, &[keys::ROUND, j as u64]), train, test));
        }
    }
    let labels = d.require_labels()?;
    let big_name = kind.name().to_string();
    let rounds = par_map(&jobs, |(r, j, round_seed, train, test)| -> Result<FoldOutcome> {
        let round = fit_round(d, train, &kind, cfg, *round_seed)?;
        if round.med_rows.iter().any(|row| test.binary_search(row).is_ok()) {
            return Err(Error::InvalidConfig("median tree saw test rows".into()));
        }
        let test_set = d.subset(test);
        let truth: Vec<ClassId> = test.iter().map(|&i| labels[i]).collect();
        let big_acc = {
            let preds = round.big_predictions(d, test, &kind)?;
            agreement(&preds, &truth)?
        };
        let mut accuracies = BTreeMap::new();
        accuracies.insert(BM.to_string(), accuracy(&round.bm, &test_set)?);
        accuracies.insert(ST.to_string(), accuracy(&round.st, &test_set)?);
        accuracies.insert(MED.to_string(), accuracy(&round.med, &test_set)?);
        accuracies.insert(big_name.clone(), big_acc);
        let mut models = BTreeMap::new();
        models.insert(BM.to_string(), round.bm);
        models.insert(ST.to_string(), round.st);
        models.insert(MED.to_string(), round.med);
        Ok(FoldOutcome {
            repeat: *r,
            fold_index: *j,
            accuracies,
            models,
            med_epsilon: round.med_epsilon,
            med_rows: round.med_rows,
            test_rows: test.clone(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut names: Vec<String> = COMPACT_MODELS.iter().map(|s| s.to_string()).collect();
    names.push(big_name.clone());
    let n = rounds.len() as f64;
    let mean_accuracy = names
        .iter()
        .map(|name| (name.clone(), rounds.iter().map(|o| o.accuracies[name]).sum::<f64>() / n))
        .collect();
    let scores: Vec<Vec<f64>> = rounds
        .iter()
        .map(|o| COMPACT_MODELS.iter().map(|m| o.accuracies[*m]).collect())
        .collect();
    let win_rate = COMPACT_MODELS.iter().map(|m| m.to_string()).zip(win_rates(&scores)).collect();
    Ok(ExperimentReport {
        big_model: big_name,
        mean_accuracy,
        win_rate,
        repeats: cfg.repeats,
        folds: cfg.folds,
        seed_list,
        rounds,
    })
}

/// Fold-omission stability of each compact model type.
///
/// Each repeat holds out a test split, cuts the remaining rows into
/// `cfg.folds` folds, and trains every model once per omitted fold. The
/// score of a model type is its mean agreement on the test split over all
/// unordered pairs of rounds.
pub fn robustness_experiment(d: &Dataset, kind: BigKind<'_>, cfg: &ExperimentConfig) -> Result<RobustnessReport> {
    cfg.validate()?;
    check_kind(d, &kind)?;
    let seed_list: Vec<u64> = (0..cfg.repeats).map(|r| cfg.repeat_seed(r)).collect();
    let mut jobs = Vec::new();
    let mut tests = Vec::new();
    for (r, &rs) in seed_list.iter().enumerate() {
        let spec = SplitSpec { seed: seed::derive(rs, &[keys::SPLIT]), fraction: cfg.test_fraction, stratified: cfg.stratified };
        let (rest, test) = split_indices(d, &spec)?;
        let rest_set = d.subset(&rest);
        for (j, (kept, _omitted)) in kfold(&rest_set, cfg.folds, seed::derive(rs, &[keys::FOLDS]), cfg.stratified)?.into_iter().enumerate() {
            let rows: Vec<usize> = kept.iter().map(|&i| rest[i]).collect();
            jobs.push((r, seed::derive(rs, &[keys::ROUND, j as u64]), rows));
        }
        tests.push(test);
    }
    let preds = par_map(&jobs, |(r, round_seed, rows)| -> Result<[Vec<ClassId>; 3]> {
        let round = fit_round(d, rows, &kind, cfg, *round_seed)?;
        let test_set = d.subset(&tests[*r]);
        Ok([round.bm.predict(&test_set)?, round.st.predict(&test_set)?, round.med.predict(&test_set)?])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut per_repeat = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats {
        let mine: Vec<&[Vec<ClassId>; 3]> = jobs.iter().zip(&preds).filter(|((jr, _, _), _)| *jr == r).map(|(_, p)| p).collect();
        let mut scores = BTreeMap::new();
        for (m, name) in COMPACT_MODELS.iter().enumerate() {
            let mut total = 0.0;
            let mut pairs = 0usize;
            for a in 0..mine.len() {
                for b in a + 1..mine.len() {
                    total += agreement(&mine[a][m], &mine[b][m])?;
                    pairs += 1;
                }
            }
            scores.insert(name.to_string(), if pairs == 0 { 1.0 } else { total / pairs as f64 });
        }
        per_repeat.push(scores);
    }
    let agreement = COMPACT_MODELS
        .iter()
        .map(|name| {
            let mean = per_repeat.iter().map(|s| s[*name]).sum::<f64>() / cfg.repeats as f64;
            (name.to_string(), mean)
        })
        .collect();
    Ok(RobustnessReport { big_model: kind.name().to_string(), agreement, per_repeat, repeats: cfg.repeats, seed_list })
}
