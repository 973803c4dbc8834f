use alloc::vec::Vec;

use super::cart::midpoint;
use super::{certify_infeasible, find_violation, ConsistentLearner, FailReason, Learned};
use crate::data::{ConstraintSample, Dataset, LabelSet};
use crate::error::{Error, Result};
use crate::model::{Node, TreeModel};

/// Midpoints between consecutive distinct values of each feature, over every
/// row of `d`, as `(feature, threshold)` pairs in enumeration order.
pub fn candidate_thresholds(d: &Dataset) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for feat in 0..d.num_attrs() {
        let mut vals: Vec<f64> = (0..d.num_rows()).map(|r| d.value(r, feat)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        out.extend(vals.windows(2).map(|w| (feat, midpoint(w[0], w[1]))));
    }
    out
}

/// Exact consistency search over constants, stumps and (for `max_depth` 2)
/// depth-2 trees with splits at [`candidate_thresholds`].
///
/// Models are tried in a fixed order: constants by class, then stumps by
/// (feature, threshold), then depth-2 trees by root split. The first
/// consistent model is returned, so a `Fail` proves the class holds none.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustiveLearner {
    pub max_depth: usize,
    /// Largest admissible `1 + S + S^2` for `S` candidate splits.
    pub budget: usize,
}

impl Default for ExhaustiveLearner {
    fn default() -> Self {
        ExhaustiveLearner { max_depth: 1, budget: 1_000_000 }
    }
}

impl ExhaustiveLearner {
    pub fn new(max_depth: usize) -> Self {
        ExhaustiveLearner { max_depth, ..Self::default() }
    }
}

fn side_sets(d: &Dataset, pairs: &[(usize, LabelSet)], k: usize, feat: usize, thr: f64) -> (LabelSet, LabelSet) {
    pairs.iter().fold((LabelSet::full(k), LabelSet::full(k)), |(l, r), &(row, set)| {
        if d.value(row, feat) < thr {
            (l.intersect(set), r)
        } else {
            (l, r.intersect(set))
        }
    })
}

/// Constant or stump satisfying every pair, in enumeration order.
fn shallow(d: &Dataset, pairs: &[(usize, LabelSet)], k: usize, splits: &[(usize, f64)]) -> Option<Node> {
    let all = pairs.iter().fold(LabelSet::full(k), |acc, &(_, s)| acc.intersect(s));
    if let Some(c) = all.first() {
        return Some(Node::leaf(c));
    }
    splits.iter().find_map(|&(feat, thr)| {
        let (l, r) = side_sets(d, pairs, k, feat, thr);
        Some(Node::split(feat, thr, Node::leaf(l.first()?), Node::leaf(r.first()?)))
    })
}

impl ConsistentLearner for ExhaustiveLearner {
    fn learn(&self, d: &Dataset, s: &ConstraintSample) -> Result<Learned> {
        if !(1..=2).contains(&self.max_depth) {
            return Err(Error::InvalidConfig("exhaustive search supports maxDepth 1 or 2".into()));
        }
        s.validate(d.num_rows())?;
        let splits = candidate_thresholds(d);
        let n = splits.len();
        let needed = 1usize.saturating_add(n).saturating_add(if self.max_depth == 2 { n.saturating_mul(n) } else { 0 });
        if needed > self.budget {
            return Err(Error::EnumerationBudgetExceeded { needed, budget: self.budget });
        }
        if let Some(FailReason::EmptyLabelSet { row }) = certify_infeasible(d, s) {
            return Ok(Learned::Fail(FailReason::EmptyLabelSet { row }));
        }
        let k = d.num_classes();
        let found = shallow(d, &s.pairs, k, &splits).or_else(|| {
            if self.max_depth < 2 {
                return None;
            }
            splits.iter().find_map(|&(feat, thr)| {
                let (lp, rp): (Vec<_>, Vec<_>) = s.pairs.iter().partition(|&&(row, _)| d.value(row, feat) < thr);
                let left = shallow(d, &lp, k, &splits)?;
                let right = shallow(d, &rp, k, &splits)?;
                Some(Node::split(feat, thr, left, right))
            })
        });
        let Some(root) = found else {
            return Ok(Learned::Fail(FailReason::NoConsistentModel));
        };
        let model = TreeModel { root, max_depth: self.max_depth, num_features: d.num_attrs(), num_classes: k };
        if let Some(row) = find_violation(&model, d, s) {
            return Err(Error::ConstraintViolation { row });
        }
        Ok(Learned::Model(model))
    }

    fn is_exact(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ClassId;
    use alloc::vec;

    fn line(vals: &[f64], k: usize) -> Dataset {
        Dataset::from_rows(&vals.iter().map(|&v| vec![v]).collect::<Vec<_>>(), None, k).unwrap()
    }

    fn single(c: usize) -> LabelSet {
        LabelSet::singleton(ClassId(c))
    }

    #[test]
    fn thresholds_are_midpoints_of_distinct_values() {
        let d = line(&[3.0, 1.0, 3.0, 2.0], 2);
        assert_eq!(candidate_thresholds(&d), vec![(0, 1.5), (0, 2.5)]);
    }

    #[test]
    fn constant_comes_first() {
        let d = line(&[0.0, 1.0], 3);
        let both = LabelSet::from_classes([ClassId(1), ClassId(2)]);
        let s = ConstraintSample { pairs: vec![(0, both), (1, both)], trimmed_rows: vec![] };
        let Learned::Model(m) = ExhaustiveLearner::new(1).learn(&d, &s).unwrap() else { panic!() };
        assert_eq!(m.root, Node::leaf(ClassId(1)));
    }

    #[test]
    fn stump_and_depth_two() {
        let d = line(&[0.0, 1.0, 2.0], 2);
        let s = ConstraintSample { pairs: vec![(0, single(0)), (1, single(1)), (2, single(0))], trimmed_rows: vec![] };
        assert_eq!(ExhaustiveLearner::new(1).learn(&d, &s).unwrap(), Learned::Fail(FailReason::NoConsistentModel));
        let Learned::Model(m) = ExhaustiveLearner::new(2).learn(&d, &s).unwrap() else { panic!() };
        assert_eq!(find_violation(&m, &d, &s), None);
        assert_eq!(m.depth(), 2);
    }

    #[test]
    fn duplicates_fail() {
        let d = line(&[1.0, 1.0], 2);
        let s = ConstraintSample { pairs: vec![(0, single(0)), (1, single(1))], trimmed_rows: vec![] };
        assert_eq!(ExhaustiveLearner::new(2).learn(&d, &s).unwrap(), Learned::Fail(FailReason::NoConsistentModel));
    }

    #[test]
    fn budget_guard() {
        let d = line(&(0..20).map(f64::from).collect::<Vec<_>>(), 2);
        let s = ConstraintSample { pairs: vec![], trimmed_rows: vec![] };
        let tight = ExhaustiveLearner { max_depth: 2, budget: 100 };
        assert_eq!(tight.learn(&d, &s), Err(Error::EnumerationBudgetExceeded { needed: 1 + 19 + 361, budget: 100 }));
    }
}
