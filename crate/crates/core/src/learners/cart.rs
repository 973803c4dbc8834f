use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use super::{class_weights, LearnerConfig};
use crate::data::{ClassId, Dataset};
use crate::error::Result;
use crate::model::{Node, TreeModel};

/// Midpoint between two consecutive distinct sorted values, kept strictly
/// above `lo` so that `lo` routes left and `hi` routes right.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Weighted Gini CART growth shared by single trees and forest members.
pub(crate) struct Grower<'a> {
    pub d: &'a Dataset,
    pub labels: &'a [ClassId],
    pub weights: &'a [f64],
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features drawn per split; `None` considers all of them.
    pub max_features: Option<usize>,
}

impl Grower<'_> {
    pub fn grow(&self, rows: &mut [usize], depth: usize, rng: &mut Option<ChaCha8Rng>) -> Node {
        let k = self.d.num_classes();
        let mut totals = vec![0.0; k];
        for &r in rows.iter() {
            let c = self.labels[r].0;
            totals[c] += self.weights[c];
        }
        let leaf = Node::leaf(weighted_argmax(&totals));
        let present = {
            let mut seen = vec![false; k];
            rows.iter().for_each(|&r| seen[self.labels[r].0] = true);
            seen.iter().filter(|&&s| s).count()
        };
        if present <= 1 || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return leaf;
        }
        let Some((feat, thr)) = self.best_split(rows, &totals, rng) else {
            return leaf;
        };
        let split_at = partition(rows, |&r| self.d.value(r, feat) < thr);
        let (left_rows, right_rows) = rows.split_at_mut(split_at);
        let left = self.grow(left_rows, depth + 1, rng);
        let right = self.grow(right_rows, depth + 1, rng);
        Node::split(feat, thr, left, right)
    }

    fn best_split(&self, rows: &[usize], totals: &[f64], rng: &mut Option<ChaCha8Rng>) -> Option<(usize, f64)> {
        let p = self.d.num_attrs();
        let features: Vec<usize> = match (self.max_features, rng.as_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut f = index::sample(rng, p, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        };
        let k = totals.len();
        let n = rows.len();
        let total_w: f64 = totals.iter().sum();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut left = vec![0.0; k];
        for feat in features {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.d.value(r, feat), self.labels[r].0)));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|v| *v = 0.0);
            let mut left_w = 0.0;
            for i in 0..n - 1 {
                let (v, c) = pairs[i];
                left[c] += self.weights[c];
                left_w += self.weights[c];
                let next = pairs[i + 1].0;
                if !(v < next) || i + 1 < self.min_leaf || n - i - 1 < self.min_leaf {
                    continue;
                }
                let right_w = total_w - left_w;
                if left_w <= 0.0 || right_w <= 0.0 {
                    continue;
                }
                let mut sq_left = 0.0;
                let mut sq_right = 0.0;
                for c in 0..k {
                    sq_left += left[c] * left[c];
                    let rc = totals[c] - left[c];
                    sq_right += rc * rc;
                }
                let impurity = (left_w - sq_left / left_w) + (right_w - sq_right / right_w);
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, feat, midpoint(v, next)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Largest weight; ties to the lowest class.
pub(crate) fn weighted_argmax(w: &[f64]) -> ClassId {
    let mut best = 0;
    for (c, &v) in w.iter().enumerate() {
        if v > w[best] {
            best = c;
        }
    }
    ClassId(best)
}

/// Stable in-place partition; returns the number of elements satisfying `pred`.
pub(crate) fn partition<T: Copy>(items: &mut [T], pred: impl Fn(&T) -> bool) -> usize {
    let (yes, no): (Vec<T>, Vec<T>) = items.iter().partition(|x| pred(x));
    let split = yes.len();
    for (slot, v) in items.iter_mut().zip(yes.into_iter().chain(no)) {
        *slot = v;
    }
    split
}

/// Greedy class-weighted Gini tree on the dataset's own labels.
///
/// Split candidates are midpoints between consecutive distinct values; score
/// ties go to the lower feature index, then the lower threshold.
pub fn train_standard_tree(d: &Dataset, cfg: &LearnerConfig) -> Result<TreeModel> {
    cfg.validate()?;
    let labels = d.require_labels()?;
    let weights = class_weights(labels, d.num_classes(), cfg.class_weighting);
    let grower = Grower {
        d,
        labels,
        weights: &weights,
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf_size,
        max_features: None,
    };
    let mut rows: Vec<usize> = (0..d.num_rows()).collect();
    let root = grower.grow(&mut rows, 0, &mut None);
    Ok(TreeModel { root, max_depth: cfg.max_depth, num_features: d.num_attrs(), num_classes: d.num_classes() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::learners::ClassWeighting;
    use crate::model::{accuracy, Classifier};

    fn cfg(max_depth: usize, weighting: ClassWeighting) -> LearnerConfig {
        LearnerConfig { max_depth, min_leaf_size: 1, class_weighting: weighting, seed: 0 }
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let d = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], Some(vec![1, 1, 1]), 2).unwrap();
        let t = train_standard_tree(&d, &cfg(4, ClassWeighting::Balanced)).unwrap();
        assert_eq!(t.root, Node::leaf(ClassId(1)));
    }

    #[test]
    fn xor_defeats_a_stump() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let d = Dataset::from_rows(&rows, Some(vec![0, 1, 1, 0]), 2).unwrap();
        let stump = train_standard_tree(&d, &cfg(1, ClassWeighting::Uniform)).unwrap();
        assert!(accuracy(&stump, &d).unwrap() <= 0.75);
        let deep = train_standard_tree(&d, &cfg(2, ClassWeighting::Uniform)).unwrap();
        assert_eq!(accuracy(&deep, &d).unwrap(), 1.0);
    }

    #[test]
    fn balanced_weighting_flips_majority_leaf() {
        // 90/10 classes overall. At x = 0 sit 9 rows of class 0 and 3 of class 1,
        // indistinguishable. Balanced weights are 100/180 and 100/20, so the
        // leaf masses are 5 vs 15 and the minority class wins there.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..9 {
            rows.push(vec![0.0]);
            labels.push(0);
        }
        for _ in 0..3 {
            rows.push(vec![0.0]);
            labels.push(1);
        }
        for _ in 0..81 {
            rows.push(vec![1.0]);
            labels.push(0);
        }
        for _ in 0..7 {
            rows.push(vec![2.0]);
            labels.push(1);
        }
        let d = Dataset::from_rows(&rows, Some(labels), 2).unwrap();
        let uniform = train_standard_tree(&d, &cfg(3, ClassWeighting::Uniform)).unwrap();
        let balanced = train_standard_tree(&d, &cfg(3, ClassWeighting::Balanced)).unwrap();
        assert_eq!(uniform.predict_row(&[0.0]), ClassId(0));
        assert_eq!(balanced.predict_row(&[0.0]), ClassId(1));
    }

    #[test]
    fn depth_and_leaf_bounds() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![f64::from(i), f64::from(i % 7)]).collect();
        let labels = (0..64).map(|i| (i * 7 + i / 3) % 3).collect();
        let d = Dataset::from_rows(&rows, Some(labels), 3).unwrap();
        for depth in 1..6 {
            let t = train_standard_tree(&d, &cfg(depth, ClassWeighting::Balanced)).unwrap();
            assert!(t.depth() <= depth);
            assert!(t.leaf_count() <= 1 << depth);
        }
    }

    #[test]
    fn unlabeled_is_rejected() {
        let d = Dataset::from_rows(&[vec![0.0]], None, 2).unwrap();
        assert_eq!(train_standard_tree(&d, &LearnerConfig::default()), Err(Error::UnlabeledDataset));
    }
}
