//! End-to-end checks of the command-line surface: exit codes and the
//! solve-vs-brute split on the generated counterexample instance.

mod common;

use clap::Parser;
use finalg::cli::{run, Cli};
use finalg::model::{Atom, PPFormula};
use finalg::transform::linear_counterexample;
use finalg::wnu::Blocker;
use finalg::{ConstraintLanguage, Domain, Relation};

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn exit_code(args: &[&str]) -> i32 {
    let mut argv = vec!["finalg"];
    argv.extend_from_slice(args);
    run(Cli::try_parse_from(argv).unwrap())
}

#[test]
fn command_exit_codes() {
    assert_eq!(exit_code(&["analyze", &data("min.alg")]), 0);
    assert_eq!(exit_code(&["analyze", &data("min.alg"), "--json"]), 0);
    assert_eq!(exit_code(&["wnu", &data("xor.alg"), "--arity", "4"]), 1);
    assert_eq!(exit_code(&["wnu", &data("xor.alg"), "--arity", "3"]), 0);
    assert_eq!(exit_code(&["wnu", &data("maj.alg"), "--all"]), 0);
    assert_eq!(exit_code(&["core", &data("leq.lang")]), 0);
    assert_eq!(exit_code(&["solve", &data("triangle.cspi")]), 1);
    assert_eq!(exit_code(&["brute", &data("triangle.cspi")]), 1);
    assert_eq!(
        exit_code(&[
            "gadget",
            &data("nae.lang"),
            "--ppdef",
            &data("nae_blocker.ppdef"),
            "--nae",
            &data("triangle.nae"),
        ]),
        0
    );
    assert_eq!(exit_code(&["counterexample", &data("aff_z2.lang")]), 0);

    // input errors
    assert_eq!(exit_code(&["analyze", &data("no_such_file.alg")]), 3);
    assert_eq!(exit_code(&["wnu", &data("xor.alg")]), 3);
    assert_eq!(exit_code(&["counterexample", &data("nae.lang")]), 3);
}

#[test]
fn counterexample_file_splits_solve_and_brute() {
    let k = 2;
    let lang = ConstraintLanguage::new(
        Domain::new(k),
        vec![
            ("aff".to_string(), common::r_aff(k)),
            ("c0".to_string(), Relation::unary(k, [0])),
            ("c1".to_string(), Relation::unary(k, [1])),
        ],
    )
    .unwrap();
    let blocker = Blocker::P { s_set: vec![0, 1], p: 2, s: 1, phi: vec![0, 1] };
    let ppdef = PPFormula::new(
        4,
        0,
        vec![Atom::Rel { name: "aff".into(), vars: vec![0, 1, 2, 3] }],
    );
    let inst = linear_counterexample(&lang, &blocker, &ppdef).unwrap();

    let dir = std::env::temp_dir().join("finalg-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("counterexample.cspi");
    std::fs::write(&path, inst.format_instance()).unwrap();

    let path = path.to_str().unwrap();
    assert_eq!(exit_code(&["solve", path]), 0, "solve must answer Ok");
    assert_eq!(exit_code(&["brute", path]), 1, "brute force must answer unsat");
}
