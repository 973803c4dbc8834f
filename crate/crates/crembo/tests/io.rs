mod common;

use crembo::io::{class_mapping, load_csv, read_dataset, read_matrix, write_matrix, Labels};
use crembo_core::{Error, TableOracle};
use proptest::prelude::*;

#[test]
fn iris_loads_with_three_classes() {
    let d = load_csv(&common::data_path("iris.csv"), "species").unwrap();
    assert_eq!((d.num_rows(), d.num_attrs(), d.num_classes()), (150, 4, 3));
    assert_eq!(d.class_names(), ["setosa", "versicolor", "virginica"]);
    assert_eq!(d.class_counts(), [50, 50, 50]);
}

#[test]
fn breast_cancer_loads() {
    let d = load_csv(&common::data_path("breast_cancer.csv"), "diagnosis").unwrap();
    assert_eq!((d.num_rows(), d.num_attrs(), d.num_classes()), (569, 30, 2));
}

#[test]
fn loader_errors() {
    let csv = "a,b,y\n1,2,x\n3,oops,y\n";
    assert!(matches!(read_dataset(csv.as_bytes(), Labels::Column("label")), Err(Error::MissingColumn(c)) if c == "label"));
    assert!(matches!(
        read_dataset(csv.as_bytes(), Labels::Column("y")),
        Err(Error::NonNumericFeature { row: 1, ref column }) if column == "b"
    ));
    assert!(matches!(read_dataset("y\nx\n".as_bytes(), Labels::Column("y")), Err(Error::EmptyDataset)));
}

proptest! {
    #[test]
    fn matrix_round_trip_is_bit_exact(m in 1usize..20, k in 1usize..5, raw in prop::collection::vec(0u32..1000, 100)) {
        let values: Vec<f64> = raw.iter().cycle().take(m * k).map(|&v| f64::from(v) + 1.0).collect();
        let o = TableOracle::from_matrix(values, m, k, true).unwrap();
        let names: Vec<String> = (0..k).map(|c| c.to_string()).collect();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &o, &names).unwrap();
        let (values, rows, cols) = read_matrix(&buf[..]).unwrap();
        let back = TableOracle::from_matrix(values, rows, cols, false).unwrap();
        prop_assert_eq!(back, o);
    }

    #[test]
    fn class_mapping_is_a_bijection(labels in prop::collection::vec("[a-c]{1,2}|[0-9]{1,2}", 1..30)) {
        let names = class_mapping(labels.iter().map(String::as_str));
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), names.len());
        prop_assert!(labels.iter().all(|l| names.contains(l)));
    }
}
