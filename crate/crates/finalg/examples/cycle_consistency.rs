//! The cycle-consistency solver and its blind spot.
//!
//! `Solve` alternates `CheckCC` (a fixpoint of binary-projection
//! compositions) with domain reductions. `NoSolution` is always
//! correct, but `Ok` is not a satisfiability proof: this example
//! generates the classic four-equation linear system over Z2 that is
//! unsatisfiable (summing the equations gives 0 = 1) yet fully
//! cycle-consistent.
//!
//! Run with `cargo run --example cycle_consistency`.

use finalg::model::{parse_language, Atom, PPFormula};
use finalg::solver::{brute_force_solve, check_cc, solve, BruteOutcome, SolveOutcome, BRUTE_NODE_LIMIT};
use finalg::transform::linear_counterexample;
use finalg::wnu::Blocker;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    for k in [2usize, 3] {
        let text = std::fs::read_to_string(format!("{dir}/aff_z{k}.lang")).unwrap();
        let lang = parse_language(&text).unwrap();
        let blocker = Blocker::P {
            s_set: (0..k).collect(),
            p: k,
            s: 1,
            phi: (0..k).collect(),
        };
        let ppdef = PPFormula::new(
            4,
            0,
            vec![Atom::Rel { name: "aff".into(), vars: vec![0, 1, 2, 3] }],
        );
        let inst = linear_counterexample(&lang, &blocker, &ppdef).unwrap();

        println!("Z{k} counterexample ({} variables):", inst.var_count());
        let cc = check_cc(&inst);
        println!(
            "  CheckCC: {} fixpoint iterations, empty reduction = {}",
            cc.table.iterations,
            cc.reduction.is_empty_reduction()
        );
        match solve(&inst) {
            SolveOutcome::Ok { trace, .. } => {
                println!("  Solve:   Ok after {} reduction rounds", trace.len());
            }
            SolveOutcome::NoSolution => println!("  Solve:   NoSolution"),
        }
        match brute_force_solve(&inst, BRUTE_NODE_LIMIT) {
            BruteOutcome::Unsat => println!("  Oracle:  Unsat — Solve's Ok was a false positive"),
            other => println!("  Oracle:  {other:?}"),
        }
    }
}
