mod common;

use std::collections::BTreeSet;

use crembo_core::eval::{agreement, breakdown_probe, default_delta_grid, generalization_experiment, win_rates, BigKind, ExperimentConfig};
use crembo_core::learners::{ExhaustiveLearner, ForestConfig};
use crembo_core::{ClassId, Dataset, TableOracle};
use proptest::prelude::*;

proptest! {
    #[test]
    fn win_rates_sum_to_one_hundred(rounds in prop::collection::vec(prop::collection::vec((0u8..5).prop_map(|v| f64::from(v) / 4.0), 3), 1..40)) {
        let rates = win_rates(&rounds);
        prop_assert!((rates.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn agreement_is_symmetric(a in prop::collection::vec(0usize..3, 1..50), b in prop::collection::vec(0usize..3, 50)) {
        let a: Vec<ClassId> = a.into_iter().map(ClassId).collect();
        let b: Vec<ClassId> = b[..a.len()].iter().copied().map(ClassId).collect();
        prop_assert_eq!(agreement(&a, &b).unwrap(), agreement(&b, &a).unwrap());
        prop_assert_eq!(agreement(&a, &a).unwrap(), 1.0);
    }
}

#[test]
fn two_row_breakdown_bound() {
    let d = Dataset::from_rows(&[vec![0.0], vec![1.0]], None, 2).unwrap();
    let o = TableOracle::from_matrix(vec![0.6, 0.4, 0.3, 0.7], 2, 2, false).unwrap();
    let small: Vec<f64> = default_delta_grid().into_iter().filter(|&x| x <= 0.14).collect();
    let r = breakdown_probe(&d, &o, &ExhaustiveLearner::new(1), &small).unwrap();
    assert_eq!((r.min_prob, r.depth, r.target_row, r.target_class), (0.3, 0.6, 1, ClassId(0)));
    assert!((r.bound - 0.15).abs() < 1e-12);
    assert!(r.empirical_breakdown.is_none() && r.passed);
}

#[test]
fn compact_models_never_see_test_rows() {
    let d = common::iris();
    let cfg = ExperimentConfig { folds: 5, repeats: 2, seed: 9, ..ExperimentConfig::default() };
    let report = generalization_experiment(&d, BigKind::Forest(ForestConfig { tree_count: 20, ..ForestConfig::default() }), &cfg).unwrap();
    assert_eq!(report.rounds.len(), 10);
    for round in &report.rounds {
        let test: BTreeSet<usize> = round.test_rows.iter().copied().collect();
        assert!(round.med_rows.iter().all(|r| !test.contains(r)));
        assert_eq!(round.models.len(), 3);
    }
    let total: f64 = report.win_rate.values().sum();
    assert!((total - 100.0).abs() < 1e-9);
}
