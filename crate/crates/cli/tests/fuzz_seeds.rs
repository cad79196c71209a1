//! Replays the checked-in fuzz corpus, then throws random bytes at the same
//! entry points.

use std::path::PathBuf;

use l1exact::linprog::{solve, LpStatus};
use l1exact_cli::fuzzing;
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

#[test]
fn replay_ranges() {
    corpus("ranges").iter().for_each(|s| fuzzing::ranges(s));
}

#[test]
fn replay_csv_table() {
    corpus("csv_table").iter().for_each(|s| fuzzing::csv_table(s));
}

#[test]
fn replay_lp_solve() {
    let seeds = corpus("lp_solve");
    seeds.iter().for_each(|s| fuzzing::lp_solve(s));
    let statuses: Vec<LpStatus> =
        seeds.iter().filter_map(|s| fuzzing::decode_lp(s)).map(|lp| solve(&lp).status).collect();
    for want in [LpStatus::Optimal, LpStatus::Infeasible, LpStatus::Unbounded] {
        assert!(statuses.contains(&want), "corpus has no {want:?} case");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn random_bytes(data in proptest::collection::vec(any::<u8>(), 0..96)) {
        fuzzing::ranges(&data);
        fuzzing::csv_table(&data);
        fuzzing::lp_solve(&data);
    }

    #[test]
    fn random_range_text(s in "[0-9.=:e+-]{0,20}") {
        fuzzing::ranges(s.as_bytes());
    }

    #[test]
    fn random_csv_text(s in "[a-c0-9,.\"\r\n -]{0,60}") {
        fuzzing::csv_table(s.as_bytes());
    }
}
