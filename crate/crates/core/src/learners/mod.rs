//! Native learners.
//!
//! * [`train_standard_tree`]: class-weighted Gini CART, the baseline trees.
//! * [`train_forest`]: bagged CART with per-split feature subsampling.
//! * [`ConstrainedTreeLearner`]: greedy tree induction against per-row label
//!   sets, the feasibility test used by the median search at scale.
//! * [`ExhaustiveLearner`]: exact search over constants, stumps and depth-2
//!   trees, for small instances where optimality must be certified.

mod cart;
mod constrained;
mod exhaustive;
mod forest;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{ClassId, ConstraintSample, Dataset};
use crate::error::{Error, Result};
use crate::model::{Classifier, TreeModel};

pub use cart::train_standard_tree;
pub use constrained::ConstrainedTreeLearner;
pub use exhaustive::{candidate_thresholds, ExhaustiveLearner};
pub use forest::{train_forest, ForestConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeighting {
    /// Each class weighs `m / (K * m_c)`.
    Balanced,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LearnerConfig {
    pub max_depth: usize,
    pub min_leaf_size: usize,
    pub class_weighting: ClassWeighting,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig { max_depth: 4, min_leaf_size: 1, class_weighting: ClassWeighting::Balanced, seed: 0 }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_leaf_size == 0 {
            return Err(Error::InvalidConfig("maxDepth and minLeafSize must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-class weights for a label vector.
pub fn class_weights(labels: &[ClassId], num_classes: usize, weighting: ClassWeighting) -> Vec<f64> {
    match weighting {
        ClassWeighting::Uniform => vec![1.0; num_classes],
        ClassWeighting::Balanced => {
            let mut counts = vec![0usize; num_classes];
            for c in labels {
                counts[c.0] += 1;
            }
            let m = labels.len() as f64;
            counts
                .into_iter()
                .map(|mc| if mc == 0 { 0.0 } else { m / (num_classes as f64 * mc as f64) })
                .collect()
        }
    }
}

/// Why a consistent learner gave up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailReason {
    /// Some constrained row allows no class at all.
    EmptyLabelSet { row: usize },
    /// Identical feature vectors whose label sets share no class; no
    /// function of the features can satisfy them.
    ConflictingDuplicate { rows: Vec<usize> },
    /// The search found no consistent model. Certifies nonexistence only for
    /// exact learners.
    NoConsistentModel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Learned {
    Model(TreeModel),
    Fail(FailReason),
}

/// A learner that, given allowed label sets per row, returns a model that
/// predicts an allowed class on every constrained row, or fails.
pub trait ConsistentLearner: Sync {
    fn learn(&self, d: &Dataset, s: &ConstraintSample) -> Result<Learned>;

    /// Whether a failure certifies that no member of the class is consistent.
    fn is_exact(&self) -> bool;
}

/// First constrained row where `model` predicts a disallowed class.
///
/// Evaluates the model through [`Classifier::predict_row`] only, so it shares
/// no code with any learner's own bookkeeping.
pub fn find_violation<C: Classifier + ?Sized>(model: &C, d: &Dataset, s: &ConstraintSample) -> Option<usize> {
    s.pairs
        .iter()
        .find(|(row, allowed)| !allowed.contains(model.predict_row(d.row(*row))))
        .map(|(row, _)| *row)
}

/// Rejects empty label sets and identical feature vectors with disjoint sets.
pub(crate) fn certify_infeasible(d: &Dataset, s: &ConstraintSample) -> Option<FailReason> {
    if let Some((row, _)) = s.pairs.iter().find(|(_, set)| set.is_empty()) {
        return Some(FailReason::EmptyLabelSet { row: *row });
    }
    let mut order: Vec<usize> = (0..s.pairs.len()).collect();
    let key = |i: &usize| d.row(s.pairs[*i].0);
    order.sort_by(|a, b| {
        key(a)
            .iter()
            .zip(key(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        let mut common = s.pairs[order[start]].1;
        while end < order.len() && key(&order[end]) == key(&order[start]) {
            common = common.intersect(s.pairs[order[end]].1);
            end += 1;
        }
        if common.is_empty() {
            let mut rows: Vec<usize> = order[start..end].iter().map(|&i| s.pairs[i].0).collect();
            rows.sort_unstable();
            return Some(FailReason::ConflictingDuplicate { rows });
        }
        start = end;
    }
    None
}
