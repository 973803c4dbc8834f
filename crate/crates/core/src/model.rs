//! Tree and forest predictors.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::data::{ClassId, Dataset};
use crate::error::{Error, Result};

/// Anything that maps a feature vector to a class.
pub trait Classifier {
    fn num_features(&self) -> usize;

    fn predict_row(&self, x: &[f64]) -> ClassId;

    /// Predicts every row of `d`.
    fn predict(&self, d: &Dataset) -> Result<Vec<ClassId>> {
        if d.num_attrs() != self.num_features() {
            return Err(Error::FeatureDimensionMismatch {
                expected: self.num_features(),
                found: d.num_attrs(),
            });
        }
        Ok((0..d.num_rows()).map(|i| self.predict_row(d.row(i))).collect())
    }
}

/// Binary decision tree node. Routes left when `x[feat] < thr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Leaf {
        leaf: ClassId,
    },
    Split {
        feat: usize,
        thr: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn leaf(class: ClassId) -> Self {
        Node::Leaf { leaf: class }
    }

    pub fn split(feat: usize, thr: f64, left: Node, right: Node) -> Self {
        Node::Split { feat, thr, left: Box::new(left), right: Box::new(right) }
    }

    fn route(&self, x: &[f64]) -> ClassId {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { leaf } => return *leaf,
                Node::Split { feat, thr, left, right } => {
                    node = if x[*feat] < *thr { left } else { right };
                }
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeModel {
    pub root: Node,
    pub max_depth: usize,
    pub num_features: usize,
    pub num_classes: usize,
}

impl TreeModel {
    /// A tree that predicts `class` everywhere.
    pub fn constant(class: ClassId, num_features: usize, num_classes: usize) -> Self {
        TreeModel { root: Node::leaf(class), max_depth: 0, num_features, num_classes }
    }

    /// Actual depth of the tree (0 for a single leaf).
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves()
    }

    /// Indented if/else rendering using the dataset's column and class names.
    pub fn render(&self, columns: &[String], classes: &[String]) -> String {
        fn walk(node: &Node, indent: usize, columns: &[String], classes: &[String], out: &mut String) {
            let pad = "    ".repeat(indent);
            match node {
                Node::Leaf { leaf } => {
                    let name = classes.get(leaf.0).map_or_else(|| alloc::format!("{leaf}"), Clone::clone);
                    let _ = writeln!(out, "{pad}return {name}");
                }
                Node::Split { feat, thr, left, right } => {
                    let col = columns.get(*feat).map_or_else(|| alloc::format!("x{feat}"), Clone::clone);
                    let _ = writeln!(out, "{pad}if {col} < {thr} {{");
                    walk(left, indent + 1, columns, classes, out);
                    let _ = writeln!(out, "{pad}}} else {{");
                    walk(right, indent + 1, columns, classes, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
        }
        let mut out = String::new();
        walk(&self.root, 0, columns, classes, &mut out);
        out
    }
}

impl Classifier for TreeModel {
    fn num_features(&self) -> usize {
        self.num_features
    }

    fn predict_row(&self, x: &[f64]) -> ClassId {
        self.root.route(x)
    }
}

/// Ensemble of trees combined by hard majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub tree_count: usize,
    pub per_tree_seeds: Vec<u64>,
    pub num_features: usize,
    pub num_classes: usize,
}

impl ForestModel {
    /// Number of trees voting for each class at `x`.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.num_classes];
        for tree in &self.trees {
            votes[tree.predict_row(x).0] += 1;
        }
        votes
    }
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax_lowest(counts: &[usize]) -> ClassId {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    ClassId(best)
}

impl Classifier for ForestModel {
    fn num_features(&self) -> usize {
        self.num_features
    }

    fn predict_row(&self, x: &[f64]) -> ClassId {
        argmax_lowest(&self.votes(x))
    }
}

/// Either kind of native model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Tree(TreeModel),
    Forest(ForestModel),
}

impl Classifier for Model {
    fn num_features(&self) -> usize {
        match self {
            Model::Tree(t) => t.num_features(),
            Model::Forest(f) => f.num_features(),
        }
    }

    fn predict_row(&self, x: &[f64]) -> ClassId {
        match self {
            Model::Tree(t) => t.predict_row(x),
            Model::Forest(f) => f.predict_row(x),
        }
    }
}

/// Fraction of rows where `model` matches the dataset labels.
pub fn accuracy(model: &impl Classifier, d: &Dataset) -> Result<f64> {
    let labels = d.require_labels()?;
    let preds = model.predict(d)?;
    let hits = preds.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump(class_left: usize, class_right: usize) -> TreeModel {
        TreeModel {
            root: Node::split(0, 0.5, Node::leaf(ClassId(class_left)), Node::leaf(ClassId(class_right))),
            max_depth: 1,
            num_features: 1,
            num_classes: 4,
        }
    }

    #[test]
    fn routing_is_strictly_less_than() {
        let t = stump(0, 1);
        assert_eq!(t.predict_row(&[0.49]), ClassId(0));
        assert_eq!(t.predict_row(&[0.5]), ClassId(1));
        assert_eq!(t.depth(), 1);
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn single_leaf_is_constant() {
        let t = TreeModel::constant(ClassId(2), 3, 3);
        let d = Dataset::from_rows(&[vec![0.0, 1.0, 2.0], vec![-5.0, 3.0, 9.0]], None, 3).unwrap();
        assert_eq!(t.predict(&d).unwrap(), vec![ClassId(2), ClassId(2)]);
    }

    #[test]
    fn forest_tie_goes_to_lowest_class() {
        let forest = ForestModel {
            trees: vec![stump(1, 1), stump(3, 3), stump(1, 1), stump(3, 3)],
            tree_count: 4,
            per_tree_seeds: vec![0; 4],
            num_features: 1,
            num_classes: 4,
        };
        assert_eq!(forest.predict_row(&[0.0]), ClassId(1));
    }

    #[test]
    fn forest_of_identical_trees_matches_tree() {
        let t = stump(0, 2);
        let forest = ForestModel {
            trees: vec![t.clone(); 3],
            tree_count: 3,
            per_tree_seeds: vec![1, 2, 3],
            num_features: 1,
            num_classes: 4,
        };
        for x in [-1.0, 0.2, 0.7, 3.0] {
            assert_eq!(forest.predict_row(&[x]), t.predict_row(&[x]));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let d = Dataset::from_rows(&[vec![0.0, 1.0]], None, 2).unwrap();
        assert_eq!(
            stump(0, 1).predict(&d),
            Err(Error::FeatureDimensionMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn render_nests_branches() {
        let text = stump(0, 1).render(&["width".into()], &["a".into(), "b".into()]);
        assert_eq!(text, "if width < 0.5 {\n    return a\n} else {\n    return b\n}\n");
    }
}
