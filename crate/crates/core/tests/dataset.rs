use std::io::Write;

use mop_core::{benchmarks, make_partition, sample_lhs, DesignTable, MopError, VariableMeta};
use proptest::prelude::*;

#[test]
fn csv_file_round_trip() {
    let table = benchmarks::ishigami_table::<f64>(25, 3).unwrap();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    table.write_csv(&mut file).unwrap();
    file.flush().unwrap();
    let back = DesignTable::<f64>::load_csv(file.path(), &["y"]).unwrap();
    assert_eq!(back.variable_names(), table.variable_names());
    assert_eq!(back.columns(), table.columns());
    assert_eq!(back.response("y").unwrap(), table.response("y").unwrap());
}

#[test]
fn csv_errors() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "x1,y\n1,2\n3,NaN").unwrap();
    file.flush().unwrap();
    assert!(matches!(DesignTable::<f64>::load_csv(file.path(), &["z"]), Err(MopError::NamedColumnAbsent(_))));
    assert!(matches!(
        DesignTable::<f64>::load_csv(file.path(), &["y"]),
        Err(MopError::MalformedCell { row: 1, col: 1, .. })
    ));
    assert!(matches!(DesignTable::<f64>::load_csv("/nonexistent/points.csv", &[]), Err(MopError::Io(_))));
}

#[test]
fn projections_leave_the_source_alone() {
    let table = benchmarks::ishigami_table::<f64>(10, 1).unwrap();
    let snapshot = table.clone();
    let a = table.project(&[0, 2]).unwrap();
    let b = table.project(&[1]).unwrap();
    assert_eq!(table, snapshot);
    assert_eq!(a.column(1), table.column(2));
    assert_eq!(b.column(0), table.column(1));
    assert_eq!(table.project(&[0, 1, 2]).unwrap(), table);
    assert!(matches!(table.project(&[5]), Err(MopError::IndexOutOfRange { index: 5, .. })));
}

#[test]
fn lhs_bounds_and_determinism() {
    let vars = benchmarks::ishigami_variables::<f64>();
    let a = sample_lhs(&vars, 500, 42).unwrap();
    assert_eq!(a, sample_lhs(&vars, 500, 42).unwrap());
    let pi = std::f64::consts::PI;
    assert!(a.columns().iter().flatten().all(|v| (-pi..=pi).contains(v)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_are_balanced(n in 2usize..200, q in 2usize..11, seed in any::<u64>()) {
        prop_assume!(q <= n);
        let p = make_partition(n, q, seed).unwrap();
        prop_assert_eq!(&p, &make_partition(n, q, seed).unwrap());
        let sizes = p.subset_sizes();
        prop_assert_eq!(sizes.len(), q);
        prop_assert!(sizes.iter().all(|&s| s >= 1));
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
    }

    #[test]
    fn lhs_occupies_every_stratum(n in 1usize..60, seed in any::<u64>()) {
        let t = sample_lhs(&[VariableMeta::uniform("u", 0.0, 1.0, 0)], n, seed).unwrap();
        let mut strata: Vec<usize> = t.column(0).iter().map(|v| ((v * n as f64).floor() as usize).min(n - 1)).collect();
        strata.sort_unstable();
        prop_assert_eq!(strata, (0..n).collect::<Vec<_>>());
    }
}
