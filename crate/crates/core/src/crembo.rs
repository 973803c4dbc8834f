//! Trimming sweep with validation-based selection, and the end-to-end
//! compression pipeline from a big model to a compact tree.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{split_indices, Dataset, SplitSpec};
use crate::depth::DepthValue;
use crate::error::{Error, Result};
use crate::learners::{ConsistentLearner, ConstrainedTreeLearner, LearnerConfig};
use crate::memo::{memo_trimmed, MemoResult};
use crate::model::{accuracy, ForestModel, TreeModel};
use crate::oracle::{ensemble_vote_oracle, OracleSource, TableOracle};
use crate::seed::{self, keys};
use crate::util::par_map;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CremboConfig {
    pub trim_grid: Vec<f64>,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for CremboConfig {
    fn default() -> Self {
        CremboConfig { trim_grid: vec![0.0, 0.01, 0.02, 0.05, 0.1], val_fraction: 0.15, seed: 0 }
    }
}

impl CremboConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trim_grid.is_empty() {
            return Err(Error::InvalidConfig("trimGrid must not be empty".into()));
        }
        if let Some(&bad) = self.trim_grid.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(Error::InvalidEpsilon(bad));
        }
        if self.trim_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("trimGrid must be strictly ascending".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidFraction(self.val_fraction));
        }
        Ok(())
    }
}

/// Outcome of one trimming level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EpsilonTrace {
    pub epsilon: f64,
    pub depth: Option<DepthValue>,
    pub val_accuracy: Option<f64>,
    /// Whether the search at this level produced a model of its own.
    pub feasible: bool,
    /// The entry reuses the deeper model of a smaller level.
    pub carried: bool,
    pub learner_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CremboResult {
    pub model: TreeModel,
    pub chosen_epsilon: f64,
    pub depth: DepthValue,
    pub val_accuracy: f64,
    pub trimmed_rows: Vec<usize>,
    pub per_epsilon_trace: Vec<EpsilonTrace>,
}

/// Runs the trimmed median search on `train` for each level of the grid and
/// keeps the model with the best plain accuracy on `val`.
///
/// A larger trimming level only weakens the constraints, so its result
/// should be at least as deep as any smaller level's. Heuristic learners do
/// not always find that model; when a level comes back shallower than an
/// earlier one (or finds nothing) it inherits the deepest earlier result and
/// the trace marks it `carried`. Ties in validation accuracy go to the
/// smaller level.
pub fn crembo(
    train: &Dataset,
    val: &Dataset,
    o: &dyn OracleSource,
    learner: &dyn ConsistentLearner,
    cfg: &CremboConfig,
) -> Result<CremboResult> {
    cfg.validate()?;
    val.require_labels()?;
    if val.num_attrs() != train.num_attrs() {
        return Err(Error::FeatureDimensionMismatch { expected: train.num_attrs(), found: val.num_attrs() });
    }
    let runs = par_map(&cfg.trim_grid, |&eps| match memo_trimmed(train, o, learner, eps) {
        Ok(r) => Ok(Some(r)),
        Err(Error::LearnerAlwaysFails | Error::TrimExceedsSample { .. }) => Ok(None),
        Err(e) => Err(e),
    });

    let mut trace = Vec::with_capacity(runs.len());
    let mut carried_best: Option<(MemoResult, f64)> = None;
    let mut chosen: Option<(usize, MemoResult, f64)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        let eps = cfg.trim_grid[i];
        let run = run?;
        let feasible = run.is_some();
        let learner_calls = run.as_ref().map_or(0, |r| r.learner_calls);
        let own = match run {
            Some(r) => {
                let acc = accuracy(&r.model, val)?;
                Some((r, acc))
            }
            None => None,
        };
        let (entry, carried) = match (own, carried_best.as_ref()) {
            (Some(own), Some(prev)) if own.0.depth.0 < prev.0.depth.0 => (Some(prev.clone()), true),
            (Some(own), _) => (Some(own), false),
            (None, Some(prev)) => (Some(prev.clone()), true),
            (None, None) => (None, false),
        };
        trace.push(EpsilonTrace {
            epsilon: eps,
            depth: entry.as_ref().map(|e| e.0.depth),
            val_accuracy: entry.as_ref().map(|e| e.1),
            feasible,
            carried,
            learner_calls,
        });
        if let Some((result, acc)) = entry {
            // The grid is strictly ascending, so keeping the first maximum
            // resolves accuracy ties toward the smaller level.
            if chosen.as_ref().is_none_or(|(_, _, best)| acc > *best) {
                chosen = Some((i, result.clone(), acc));
            }
            carried_best = Some((result, acc));
        }
    }
    let (i, result, val_accuracy) = chosen.ok_or(Error::AllEpsilonInfeasible)?;
    Ok(CremboResult {
        model: result.model,
        chosen_epsilon: cfg.trim_grid[i],
        depth: result.depth,
        val_accuracy,
        trimmed_rows: result.trimmed_rows,
        per_epsilon_trace: trace,
    })
}

/// The big model a compact tree is extracted from.
#[derive(Debug, Clone, Copy)]
pub enum BigModel<'a> {
    /// Hard-vote oracle of a trained forest.
    Forest(&'a ForestModel),
    /// A stored probability matrix with one row per dataset row.
    Matrix(&'a TableOracle),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum OracleProvenance {
    #[serde(rename_all = "camelCase")]
    ForestVote { tree_count: usize },
    #[serde(rename_all = "camelCase")]
    Matrix { rows: usize, classes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Compression {
    pub result: CremboResult,
    pub provenance: OracleProvenance,
    pub train_rows: Vec<usize>,
    pub val_rows: Vec<usize>,
    /// Set when a class was too small to stratify the validation split.
    pub split_note: Option<String>,
}

/// Oracle over all rows of `d` for a big model.
pub fn big_model_oracle(d: &Dataset, big: BigModel<'_>) -> Result<(TableOracle, OracleProvenance)> {
    match big {
        BigModel::Forest(f) => Ok((ensemble_vote_oracle(f, d)?, OracleProvenance::ForestVote { tree_count: f.trees.len() })),
        BigModel::Matrix(m) => {
            if m.num_rows() != d.num_rows() || m.num_classes() != d.num_classes() {
                return Err(Error::ShapeMismatch {
                    rows: d.num_rows(),
                    classes: d.num_classes(),
                    found_rows: m.num_rows(),
                    found_cols: m.num_classes(),
                });
            }
            Ok((m.clone(), OracleProvenance::Matrix { rows: m.num_rows(), classes: m.num_classes() }))
        }
    }
}

/// Validation split for the compression step: stratified, falling back to
/// an unstratified split when some class has a single row.
pub(crate) fn validation_split(d: &Dataset, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>, Option<String>)> {
    let spec = SplitSpec { seed: seed::derive(seed, &[keys::VALIDATION]), fraction, stratified: true };
    match split_indices(d, &spec) {
        Ok((kept, held)) => Ok((kept, held, None)),
        Err(Error::ClassTooSmall { class, count }) => {
            let (kept, held) = split_indices(d, &SplitSpec { stratified: false, ..spec })?;
            Ok((kept, held, Some(alloc::format!("class {class} has {count} row(s); validation split is unstratified"))))
        }
        Err(e) => Err(e),
    }
}

/// Big model to compact tree: builds the oracle, holds out a validation
/// split, and runs [`crembo`] with the constrained tree learner on the rest.
pub fn compress(d: &Dataset, big: BigModel<'_>, cfg: &CremboConfig, learner_cfg: &LearnerConfig) -> Result<Compression> {
    cfg.validate()?;
    learner_cfg.validate()?;
    d.require_labels()?;
    let (oracle, provenance) = big_model_oracle(d, big)?;
    let (train_rows, val_rows, split_note) = validation_split(d, cfg.val_fraction, cfg.seed)?;
    let train = d.subset(&train_rows);
    let val = d.subset(&val_rows);
    let restricted = TableOracle::restrict(&oracle, &train_rows);
    let learner = ConstrainedTreeLearner::new(*learner_cfg).with_preference(&restricted);
    let result = crembo(&train, &val, &restricted, &learner, cfg)?;
    Ok(Compression { result, provenance, train_rows, val_rows, split_note })
}
