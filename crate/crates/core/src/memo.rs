//! The median search: the largest oracle value `d` at which some hypothesis
//! predicts, on every row, a class the oracle believes with mass at least `d`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{ConstraintSample, Dataset, LabelSet};
use crate::depth::{check_epsilon, empirical_depth, trim_count, DepthValue};
use crate::error::{Error, Result};
use crate::learners::{find_violation, ConsistentLearner, Learned};
use crate::model::TreeModel;
use crate::oracle::{threshold_set, OracleSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MemoResult {
    pub model: TreeModel,
    /// Minimum oracle mass behind the model's predictions on the
    /// non-trimmed rows.
    pub depth: DepthValue,
    pub learner_calls: usize,
    pub probed_thresholds: Vec<f64>,
    pub trimmed_rows: Vec<usize>,
}

/// `Y_i = {y : O(i, y) >= d}` for each row. Empty sets are kept.
pub fn build_constraints(o: &dyn OracleSource, rows: &[usize], d: f64) -> ConstraintSample {
    let pairs = rows
        .iter()
        .map(|&row| {
            let set = o.row(row).iter().enumerate().filter(|(_, &p)| p >= d).fold(LabelSet::EMPTY, |s, (c, _)| s.with(c.into()));
            (row, set)
        })
        .collect();
    ConstraintSample { pairs, trimmed_rows: Vec::new() }
}

/// The `budget` rows with the smallest maximum probability, ties to the
/// lower row index, ascending.
fn trim_set(o: &dyn OracleSource, rows: &[usize], budget: usize) -> Vec<usize> {
    let max_prob = |r: usize| o.row(r).iter().copied().fold(0.0, f64::max);
    let mut order = rows.to_vec();
    order.sort_by(|&a, &b| max_prob(a).total_cmp(&max_prob(b)).then(a.cmp(&b)));
    order.truncate(budget);
    order.sort_unstable();
    order
}

/// Constraints at `d` on the rows outside `trimmed`. `None` when one of those
/// rows allows no class, i.e. when more rows are empty than were trimmed.
fn budgeted_constraints(o: &dyn OracleSource, rows: &[usize], d: f64, trimmed: &[usize]) -> Option<ConstraintSample> {
    let kept: Vec<usize> = rows.iter().copied().filter(|r| trimmed.binary_search(r).is_err()).collect();
    let mut s = build_constraints(o, &kept, d);
    if s.pairs.iter().any(|(_, set)| set.is_empty()) {
        return None;
    }
    s.trimmed_rows = trimmed.to_vec();
    Some(s)
}

fn certified_depth(model: &TreeModel, o: &dyn OracleSource, d: &Dataset, s: &ConstraintSample) -> Result<DepthValue> {
    let rows: Vec<usize> = s.pairs.iter().map(|(r, _)| *r).collect();
    Ok(empirical_depth(model, o, d, &rows)?.overall)
}

fn checked(model: TreeModel, d: &Dataset, s: &ConstraintSample) -> Result<TreeModel> {
    match find_violation(&model, d, s) {
        Some(row) => Err(Error::ConstraintViolation { row }),
        None => Ok(model),
    }
}

/// Deepest hypothesis the learner can find against `o` on all rows of `d`.
pub fn memo(d: &Dataset, o: &dyn OracleSource, learner: &dyn ConsistentLearner) -> Result<MemoResult> {
    memo_trimmed(d, o, learner, 0.0)
}

/// [`memo`] with the `floor(epsilon * m)` rows of smallest maximum
/// probability left unconstrained.
///
/// The empty label sets at any threshold belong to the rows of smallest
/// maximum probability, so a threshold is feasible only if all of its empty
/// rows fall in the trimmed set. Trimming the same rows at every threshold
/// keeps feasibility monotone for exact learners.
///
/// The smallest threshold leaves every label set full and is never probed;
/// the search runs over the remaining indices of the threshold set. After a
/// successful probe the search resumes above the model's own depth, which is
/// feasible with the same constraints. Once the range is exhausted the
/// learner is called one last time at the winning threshold. If that call
/// fails (possible for heuristic learners) the model from the winning probe
/// is kept.
pub fn memo_trimmed(d: &Dataset, o: &dyn OracleSource, learner: &dyn ConsistentLearner, epsilon: f64) -> Result<MemoResult> {
    check_epsilon(epsilon)?;
    if o.num_rows() != d.num_rows() || o.num_classes() != d.num_classes() {
        return Err(Error::ShapeMismatch {
            rows: d.num_rows(),
            classes: d.num_classes(),
            found_rows: o.num_rows(),
            found_cols: o.num_classes(),
        });
    }
    let m = d.num_rows();
    let budget = trim_count(epsilon, m);
    if budget >= m {
        return Err(Error::TrimExceedsSample { trim: budget, rows: m });
    }
    let rows: Vec<usize> = (0..m).collect();
    let theta = threshold_set(o, &rows)?;
    let values = theta.values();
    let trimmed = trim_set(o, &rows, budget);

    let mut learner_calls = 0;
    let mut probed_thresholds = Vec::new();
    let mut best = 0;
    let mut best_model: Option<TreeModel> = None;
    let (mut lo, mut hi) = (1, values.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let t = values[mid];
        probed_thresholds.push(t);
        let Some(s) = budgeted_constraints(o, &rows, t, &trimmed) else {
            hi = mid;
            continue;
        };
        learner_calls += 1;
        match learner.learn(d, &s)? {
            Learned::Model(model) => {
                let model = checked(model, d, &s)?;
                let reached = certified_depth(&model, o, d, &s)?;
                let at = theta.position(reached.0).filter(|&p| p >= mid).unwrap_or(mid);
                best = at;
                best_model = Some(model);
                lo = at + 1;
            }
            Learned::Fail(_) => hi = mid,
        }
    }

    let s = budgeted_constraints(o, &rows, values[best], &trimmed).ok_or(Error::LearnerAlwaysFails)?;
    learner_calls += 1;
    let model = match learner.learn(d, &s)? {
        Learned::Model(model) => model,
        Learned::Fail(_) => best_model.ok_or(Error::LearnerAlwaysFails)?,
    };
    let model = checked(model, d, &s)?;
    let depth = certified_depth(&model, o, d, &s)?;
    Ok(MemoResult { model, depth, learner_calls, probed_thresholds, trimmed_rows: s.trimmed_rows })
}
