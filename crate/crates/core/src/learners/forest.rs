use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cart::Grower;
use super::{class_weights, ClassWeighting};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{ForestModel, TreeModel};
use crate::seed::{self, keys};
use crate::util::par_map;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ForestConfig {
    pub tree_count: usize,
    pub max_depth: usize,
    pub class_weighting: ClassWeighting,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { tree_count: 100, max_depth: 12, class_weighting: ClassWeighting::Balanced, seed: 0 }
    }
}

/// Random forest: each tree grows on a bootstrap resample with
/// `ceil(sqrt(num_attrs))` features drawn per split.
///
/// Tree `j` uses the seed `derive(cfg.seed, [TREE, j])`, so the forest does
/// not depend on how trees are scheduled across workers. Class weights come
/// from the full training labels.
pub fn train_forest(d: &Dataset, cfg: &ForestConfig) -> Result<ForestModel> {
    if cfg.tree_count == 0 || cfg.max_depth == 0 {
        return Err(Error::InvalidConfig("treeCount and maxDepth must be at least 1".into()));
    }
    let labels = d.require_labels()?;
    let weights = class_weights(labels, d.num_classes(), cfg.class_weighting);
    let max_features = libm::ceil(libm::sqrt(d.num_attrs() as f64)) as usize;
    let grower = Grower {
        d,
        labels,
        weights: &weights,
        max_depth: cfg.max_depth,
        min_leaf: 1,
        max_features: Some(max_features.max(1)),
    };
    let per_tree_seeds: Vec<u64> = (0..cfg.tree_count as u64).map(|j| seed::derive(cfg.seed, &[keys::TREE, j])).collect();
    let n = d.num_rows();
    let trees = par_map(&per_tree_seeds, |&s| {
        let mut rng = seed::rng(s);
        let mut rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut rng = Some(rng);
        TreeModel {
            root: grower.grow(&mut rows, 0, &mut rng),
            max_depth: cfg.max_depth,
            num_features: d.num_attrs(),
            num_classes: d.num_classes(),
        }
    });
    Ok(ForestModel {
        trees,
        tree_count: cfg.tree_count,
        per_tree_seeds,
        num_features: d.num_attrs(),
        num_classes: d.num_classes(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ClassId;
    use crate::model::Classifier;
    use alloc::vec;

    fn blobs() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let c = i % 3;
            rows.push(vec![c as f64 * 3.0 + libm::sin(i as f64 * 0.37), libm::cos(i as f64 * 0.11)]);
            labels.push(c);
        }
        Dataset::from_rows(&rows, Some(labels), 3).unwrap()
    }

    #[test]
    fn deterministic_under_seed() {
        let d = blobs();
        let cfg = ForestConfig { tree_count: 1, seed: 9, ..ForestConfig::default() };
        let a = train_forest(&d, &cfg).unwrap();
        let b = train_forest(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.predict(&d).unwrap(), b.predict(&d).unwrap());
    }

    #[test]
    fn single_class_data_predicts_that_class() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![f64::from(i)]).collect();
        let d = Dataset::from_rows(&rows, Some(vec![1; 20]), 2).unwrap();
        let forest = train_forest(&d, &ForestConfig { tree_count: 10, ..ForestConfig::default() }).unwrap();
        for tree in &forest.trees {
            assert_eq!(tree.leaf_count(), 1);
            assert_eq!(tree.predict_row(&[3.0]), ClassId(1));
        }
    }

    #[test]
    fn forest_fits_separable_data() {
        let d = blobs();
        let forest = train_forest(&d, &ForestConfig { tree_count: 25, ..ForestConfig::default() }).unwrap();
        assert_eq!(forest.trees.len(), 25);
        assert_eq!(forest.per_tree_seeds.len(), 25);
        assert!(crate::model::accuracy(&forest, &d).unwrap() >= 0.95);
    }
}
