//! File formats round-trip through real files.

use std::fs::File;
use std::io::BufReader;

use dyadic_bellman::io::{
    read_step_csv, read_tree_jsonl, write_linearization_csv, write_step_csv, write_tree_jsonl,
};
use dyadic_bellman::maximal::{linearize, maximal_function};
use dyadic_bellman::trees::{build_random_tree, SplitLaw, StepFunction};

#[test]
fn tree_and_step_function_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..10 {
        let tree = build_random_tree(seed, 6, 4, SplitLaw::Skewed).unwrap();
        let phi = StepFunction::from_fn(&tree, |l| (l as f64).sqrt() / 7.0).unwrap();
        let tree_path = dir.path().join(format!("tree{seed}.jsonl"));
        let step_path = dir.path().join(format!("phi{seed}.csv"));
        write_tree_jsonl(&tree, File::create(&tree_path).unwrap()).unwrap();
        write_step_csv(&phi, File::create(&step_path).unwrap()).unwrap();

        let tree_back = read_tree_jsonl(BufReader::new(File::open(&tree_path).unwrap())).unwrap();
        assert_eq!(tree_back, tree);
        let phi_back = read_step_csv(&tree_back, File::open(&step_path).unwrap()).unwrap();
        assert_eq!(phi_back.values(), phi.values());
        assert_eq!(
            maximal_function(&phi_back).values(),
            maximal_function(&phi).values()
        );
    }
}

#[test]
fn linearization_rows_cover_the_space() {
    let tree = build_random_tree(5, 5, 3, SplitLaw::Uniform).unwrap();
    let phi = StepFunction::from_fn(&tree, |l| 1.0 + (l % 7) as f64).unwrap();
    let lin = linearize(&phi, 1.5).unwrap();
    let mut buf = Vec::new();
    write_linearization_csv(&lin, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "node_id",
            "rank_in_S",
            "mu",
            "a_I",
            "x_I",
            "y_I",
            "star_parent"
        ]
    );
    let atoms: f64 = reader
        .records()
        .map(|r| r.unwrap()[3].parse::<f64>().unwrap())
        .sum();
    assert!((atoms - 1.0).abs() < 1e-12);
}
