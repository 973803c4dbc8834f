#![allow(dead_code)]

use crembo_core::oracle::OracleSource;
use crembo_core::{ClassId, Dataset, Node, TableOracle, TreeModel};
use proptest::prelude::*;

/// One feature, up to six rows, two or three classes, small integer
/// feature values so that duplicates occur.
#[derive(Debug, Clone)]
pub struct Tiny {
    pub xs: Vec<f64>,
    pub weights: Vec<Vec<u32>>,
    pub k: usize,
}

impl Tiny {
    pub fn dataset(&self) -> Dataset {
        let rows: Vec<Vec<f64>> = self.xs.iter().map(|&x| vec![x]).collect();
        Dataset::from_rows(&rows, None, self.k).unwrap()
    }

    pub fn oracle(&self) -> TableOracle {
        let values: Vec<f64> = self.weights.iter().flatten().map(|&w| w as f64).collect();
        TableOracle::from_matrix(values, self.xs.len(), self.k, true).unwrap()
    }
}

pub fn tiny(max_rows: usize) -> impl Strategy<Value = Tiny> {
    (2usize..=max_rows, 2usize..=3).prop_flat_map(|(m, k)| {
        let row = (prop::collection::vec(0u32..=10, k), 0..k).prop_map(|(mut w, bump)| {
            w[bump] += 1;
            w
        });
        (prop::collection::vec(0u8..5, m), prop::collection::vec(row, m))
            .prop_map(move |(xs, weights)| Tiny { xs: xs.into_iter().map(f64::from).collect(), weights, k })
    })
}

/// Every constant and every single-threshold classifier on one feature, as
/// prediction vectors over the rows.
pub fn stump_labelings(xs: &[f64], k: usize) -> Vec<Vec<usize>> {
    let mut cuts: Vec<f64> = xs.to_vec();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for c in 0..k {
        out.push(vec![c; xs.len()]);
    }
    for w in cuts.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        for l in 0..k {
            for r in 0..k {
                out.push(xs.iter().map(|&x| if x < t { l } else { r }).collect());
            }
        }
    }
    out
}

/// Largest `min_i O(i, f(x_i))` over constants and stumps.
pub fn brute_force_depth(t: &Tiny, o: &dyn OracleSource) -> f64 {
    stump_labelings(&t.xs, t.k)
        .iter()
        .map(|f| f.iter().enumerate().map(|(i, &c)| o.row(i)[c]).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Walks the tree node by node, independently of `Classifier`.
pub fn walk(tree: &TreeModel, x: &[f64]) -> ClassId {
    let mut node = &tree.root;
    loop {
        match node {
            Node::Leaf { leaf } => return *leaf,
            Node::Split { feat, thr, left, right } => node = if x[*feat] < *thr { left } else { right },
        }
    }
}

/// Iris from the CLI crate's bundled CSV: four features, label last.
pub fn iris() -> Dataset {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../crembo/data/iris.csv");
    let text = std::fs::read_to_string(path).unwrap();
    let mut names: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let (label, feats) = fields.split_last().unwrap();
        rows.push(feats.iter().map(|f| f.trim().parse::<f64>().unwrap()).collect::<Vec<_>>());
        let label = label.trim().to_owned();
        let id = names.iter().position(|n| *n == label).unwrap_or_else(|| {
            names.push(label);
            names.len() - 1
        });
        labels.push(id);
    }
    Dataset::from_rows(&rows, Some(labels), names.len()).unwrap()
}
