use alloc::vec;
use alloc::vec::Vec;

use super::cart::{midpoint, partition, weighted_argmax};
use super::{certify_infeasible, class_weights, find_violation, ConsistentLearner, FailReason, Learned, LearnerConfig};
use crate::data::{ClassId, ConstraintSample, Dataset, LabelSet};
use crate::error::{Error, Result};
use crate::model::{Node, TreeModel};
use crate::oracle::OracleSource;

/// Greedy tree induction under per-row label-set constraints.
///
/// A node becomes a leaf as soon as its rows' label sets share a class. Other
/// nodes split on the (feature, threshold) that maximizes the number of rows
/// a leaf per child could satisfy, i.e. the sum over children of
/// `max_c #{rows allowing c}`. Ties go to the lower class-weighted Gini
/// impurity of each row's preferred class, then to the lower feature index
/// and threshold. A node that still conflicts at `max_depth` fails the run.
///
/// The preferred class of a row is its most probable allowed class under the
/// optional `preference` oracle (lowest allowed class without one). Leaves
/// take the shared class with the largest preference mass.
#[derive(Clone, Copy)]
pub struct ConstrainedTreeLearner<'a> {
    pub cfg: LearnerConfig,
    pub preference: Option<&'a dyn OracleSource>,
}

impl<'a> ConstrainedTreeLearner<'a> {
    pub fn new(cfg: LearnerConfig) -> Self {
        ConstrainedTreeLearner { cfg, preference: None }
    }

    /// Uses `oracle`, addressed by dataset row, to rank allowed classes.
    pub fn with_preference(mut self, oracle: &'a dyn OracleSource) -> Self {
        self.preference = Some(oracle);
        self
    }

    fn preferred(&self, row: usize, allowed: LabelSet) -> ClassId {
        match self.preference {
            Some(o) => {
                let p = o.row(row);
                allowed
                    .iter()
                    .fold(None, |best: Option<ClassId>, c| match best {
                        Some(b) if p[b.0] >= p[c.0] => Some(b),
                        _ => Some(c),
                    })
                    .unwrap_or(ClassId(0))
            }
            None => allowed.first().unwrap_or(ClassId(0)),
        }
    }
}

struct Item {
    row: usize,
    allowed: LabelSet,
    preferred: ClassId,
}

struct Builder<'b> {
    d: &'b Dataset,
    items: &'b [Item],
    pref_weights: &'b [f64],
    preference: Option<&'b dyn OracleSource>,
    cfg: &'b LearnerConfig,
}

impl Builder<'_> {
    fn leaf_class(&self, members: &[usize], shared: LabelSet) -> ClassId {
        let k = self.d.num_classes();
        let mut score = vec![0.0; k];
        for &i in members {
            let item = &self.items[i];
            match self.preference {
                Some(o) => shared.iter().for_each(|c| score[c.0] += o.prob(item.row, c)),
                None => score[item.preferred.0] += 1.0,
            }
        }
        let masked: Vec<f64> = (0..k)
            .map(|c| if shared.contains(ClassId(c)) { score[c] } else { f64::NEG_INFINITY })
            .collect();
        weighted_argmax(&masked)
    }

    fn grow(&self, members: &mut [usize], depth: usize) -> Option<Node> {
        let shared = members
            .iter()
            .fold(LabelSet::full(self.d.num_classes()), |acc, &i| acc.intersect(self.items[i].allowed));
        if !shared.is_empty() {
            return Some(Node::leaf(self.leaf_class(members, shared)));
        }
        if depth >= self.cfg.max_depth || members.len() < 2 * self.cfg.min_leaf_size {
            return None;
        }
        let (feat, thr) = self.best_split(members)?;
        let at = partition(members, |&i| self.d.value(self.items[i].row, feat) < thr);
        let (l, r) = members.split_at_mut(at);
        let left = self.grow(l, depth + 1)?;
        let right = self.grow(r, depth + 1)?;
        Some(Node::split(feat, thr, left, right))
    }

    fn best_split(&self, members: &[usize]) -> Option<(usize, f64)> {
        let k = self.d.num_classes();
        let n = members.len();
        let min_leaf = self.cfg.min_leaf_size;
        let mut allow_total = vec![0usize; k];
        let mut pref_total = vec![0.0; k];
        for &i in members {
            let item = &self.items[i];
            item.allowed.iter().for_each(|c| allow_total[c.0] += 1);
            pref_total[item.preferred.0] += self.pref_weights[item.preferred.0];
        }
        let total_w: f64 = pref_total.iter().sum();

        // (satisfiable rows, impurity, feature, threshold)
        let mut best: Option<(usize, f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut allow_left = vec![0usize; k];
        let mut pref_left = vec![0.0; k];
        for feat in 0..self.d.num_attrs() {
            pairs.clear();
            pairs.extend(members.iter().map(|&i| (self.d.value(self.items[i].row, feat), i)));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            allow_left.iter_mut().for_each(|v| *v = 0);
            pref_left.iter_mut().for_each(|v| *v = 0.0);
            let mut left_w = 0.0;
            for pos in 0..n - 1 {
                let (v, i) = pairs[pos];
                let item = &self.items[i];
                item.allowed.iter().for_each(|c| allow_left[c.0] += 1);
                let w = self.pref_weights[item.preferred.0];
                pref_left[item.preferred.0] += w;
                left_w += w;
                let next = pairs[pos + 1].0;
                if !(v < next) || pos + 1 < min_leaf || n - pos - 1 < min_leaf {
                    continue;
                }
                let sat_left = allow_left.iter().copied().max().unwrap_or(0);
                let sat_right = (0..k).map(|c| allow_total[c] - allow_left[c]).max().unwrap_or(0);
                let satisfiable = sat_left + sat_right;
                let right_w = total_w - left_w;
                let mut impurity = 0.0;
                if left_w > 0.0 {
                    impurity += left_w - pref_left.iter().map(|x| x * x).sum::<f64>() / left_w;
                }
                if right_w > 0.0 {
                    let sq: f64 = (0..k).map(|c| (pref_total[c] - pref_left[c]) * (pref_total[c] - pref_left[c])).sum();
                    impurity += right_w - sq / right_w;
                }
                let better = match best {
                    None => true,
                    Some((bs, bi, _, _)) => satisfiable > bs || (satisfiable == bs && impurity < bi),
                };
                if better {
                    best = Some((satisfiable, impurity, feat, midpoint(v, next)));
                }
            }
        }
        best.map(|(_, _, f, t)| (f, t))
    }
}

impl ConsistentLearner for ConstrainedTreeLearner<'_> {
    fn learn(&self, d: &Dataset, s: &ConstraintSample) -> Result<Learned> {
        self.cfg.validate()?;
        s.validate(d.num_rows())?;
        if let Some(o) = self.preference {
            if o.num_rows() != d.num_rows() {
                return Err(Error::ShapeMismatch {
                    rows: d.num_rows(),
                    classes: d.num_classes(),
                    found_rows: o.num_rows(),
                    found_cols: o.num_classes(),
                });
            }
        }
        if let Some(reason) = certify_infeasible(d, s) {
            return Ok(Learned::Fail(reason));
        }
        let items: Vec<Item> = s
            .pairs
            .iter()
            .map(|&(row, allowed)| Item { row, allowed, preferred: self.preferred(row, allowed) })
            .collect();
        let preferred: Vec<ClassId> = items.iter().map(|i| i.preferred).collect();
        let pref_weights = class_weights(&preferred, d.num_classes(), self.cfg.class_weighting);
        let builder = Builder { d, items: &items, pref_weights: &pref_weights, preference: self.preference, cfg: &self.cfg };
        let mut members: Vec<usize> = (0..items.len()).collect();
        let root = if members.is_empty() {
            Some(Node::leaf(ClassId(0)))
        } else {
            builder.grow(&mut members, 0)
        };
        let Some(root) = root else {
            return Ok(Learned::Fail(FailReason::NoConsistentModel));
        };
        let model = TreeModel { root, max_depth: self.cfg.max_depth, num_features: d.num_attrs(), num_classes: d.num_classes() };
        if let Some(row) = find_violation(&model, d, s) {
            return Err(Error::ConstraintViolation { row });
        }
        Ok(Learned::Model(model))
    }

    fn is_exact(&self) -> bool {
        false
    }
}
