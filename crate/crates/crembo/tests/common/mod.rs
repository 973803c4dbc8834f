#![allow(dead_code)]

use std::io::Write;
use std::path::PathBuf;

use crembo_core::oracle::OracleSource;
use crembo_core::seed;
use crembo_core::{ClassId, Dataset, Node, TableOracle, TreeModel};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Small random instance: one feature with values in 0..5, up to `max_rows`
/// rows, two or three classes, integer weights normalized into an oracle.
pub struct Tiny {
    pub xs: Vec<f64>,
    pub k: usize,
    pub d: Dataset,
    pub o: TableOracle,
}

pub fn tiny(seed: u64, max_rows: usize) -> Tiny {
    let mut rng = seed::rng(seed);
    let m = rng.gen_range(2..=max_rows);
    let k = rng.gen_range(2..=3);
    let xs: Vec<f64> = (0..m).map(|_| f64::from(rng.gen_range(0u8..5))).collect();
    let mut weights = Vec::with_capacity(m * k);
    for _ in 0..m {
        let mut row: Vec<f64> = (0..k).map(|_| f64::from(rng.gen_range(0u8..=10))).collect();
        row[rng.gen_range(0..k)] += 1.0;
        weights.extend(row);
    }
    let labels = (0..m).map(|i| (0..k).max_by(|&a, &b| weights[i * k + a].total_cmp(&weights[i * k + b]).then(b.cmp(&a))).unwrap()).collect();
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let d = Dataset::from_rows(&rows, Some(labels), k).unwrap();
    let o = TableOracle::from_matrix(weights, m, k, true).unwrap();
    Tiny { xs, k, d, o }
}

/// Max over constants and single-threshold stumps of `min_i O(i, f(x_i))`.
pub fn brute_force_depth(xs: &[f64], k: usize, o: &dyn OracleSource) -> f64 {
    let mut cuts = xs.to_vec();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut labelings: Vec<Vec<usize>> = (0..k).map(|c| vec![c; xs.len()]).collect();
    for w in cuts.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        for l in 0..k {
            for r in 0..k {
                labelings.push(xs.iter().map(|&x| if x < t { l } else { r }).collect());
            }
        }
    }
    labelings
        .iter()
        .map(|f| f.iter().enumerate().map(|(i, &c)| o.row(i)[c]).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn walk(tree: &TreeModel, x: &[f64]) -> ClassId {
    let mut node = &tree.root;
    loop {
        match node {
            Node::Leaf { leaf } => return *leaf,
            Node::Split { feat, thr, left, right } => node = if x[*feat] < *thr { left } else { right },
        }
    }
}

/// Stand-in for the Cleveland heart data: 303 rows, 13 attributes (every
/// third one a small integer code), five skewed classes from a noisy linear
/// score, and 20% of labels replaced at random.
pub fn heart_surrogate() -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = seed::rng(1);
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..303 {
        let x: Vec<f64> = (0..13)
            .map(|j| {
                let v: f64 = n.sample(&mut rng);
                if j % 3 == 2 { (v * 1.5).round().clamp(-2.0, 2.0) } else { v }
            })
            .collect();
        let score = 1.2 * x[0] + 0.9 * x[2] - 0.7 * x[4] + 0.5 * x[7] + 0.6 * n.sample(&mut rng);
        let mut y = [0.3, 1.0, 1.6, 2.4].iter().filter(|&&cut| score >= cut).count();
        if rng.gen::<f64>() < 0.2 {
            y = rng.gen_range(0..5);
        }
        rows.push(x);
        labels.push(y);
    }
    (rows, labels)
}

pub fn heart_dataset() -> Dataset {
    let (rows, labels) = heart_surrogate();
    Dataset::from_rows(&rows, Some(labels), 5).unwrap()
}

pub fn write_heart_csv(path: &std::path::Path) {
    let (rows, labels) = heart_surrogate();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).unwrap());
    let header: Vec<String> = (0..13).map(|j| format!("a{j}")).chain(["num".to_owned()]).collect();
    writeln!(f, "{}", header.join(",")).unwrap();
    for (x, y) in rows.iter().zip(labels) {
        let fields: Vec<String> = x.iter().map(f64::to_string).chain([y.to_string()]).collect();
        writeln!(f, "{}", fields.join(",")).unwrap();
    }
}
