//! NP-hardness gadget: rewriting a not-all-equal instance over a
//! language whose blocker is pp-definable.
//!
//! When a constraint language has an invariant WNU-blocker relation R
//! with a pp-definition φ, every NAE₃ constraint can be replaced by a
//! copy of φ, giving a satisfiability-preserving reduction from
//! NAE-3-SAT. Here the language is {NAE₃} itself and φ is the single
//! atom, so the gadget reproduces the source; the point is the
//! machinery, verified by the brute-force oracle on both sides.
//!
//! Run with `cargo run --example nae_gadget`.

use finalg::model::{parse_language, parse_pp_formula};
use finalg::solver::{brute_force_solve, BruteOutcome, BRUTE_NODE_LIMIT};
use finalg::transform::{nae_gadget, nae_instance, parse_nae};
use finalg::wnu::Blocker;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let lang = parse_language(&std::fs::read_to_string(format!("{dir}/nae.lang")).unwrap()).unwrap();
    let ppdef =
        parse_pp_formula(&std::fs::read_to_string(format!("{dir}/nae_blocker.ppdef")).unwrap())
            .unwrap();
    let blocker = Blocker::Wnu { b0: vec![0], b1: vec![1] };

    // x != y, y != z, x != z — unsatisfiable over {0, 1}
    let triangle = parse_nae(&std::fs::read_to_string(format!("{dir}/triangle.nae")).unwrap())
        .unwrap();
    let single = vec![[1, 2, 3]];

    for (name, nae) in [("triangle", &triangle), ("single triple", &single)] {
        let gadget = nae_gadget(&lang, &blocker, &ppdef, nae).unwrap();
        let source = brute_force_solve(&nae_instance(nae), BRUTE_NODE_LIMIT);
        let target = brute_force_solve(&gadget.instance, BRUTE_NODE_LIMIT);
        println!("{name}:");
        println!("  source {}", verdict(&source));
        println!("  gadget {}  ({} variables)", verdict(&target), gadget.instance.var_count());
    }
}

fn verdict(outcome: &BruteOutcome) -> &'static str {
    match outcome {
        BruteOutcome::Sat(_) => "satisfiable",
        BruteOutcome::Unsat => "unsatisfiable",
        BruteOutcome::LimitExceeded => "limit exceeded",
    }
}
