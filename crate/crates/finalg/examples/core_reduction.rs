//! Core reduction and restoring constants through the σ-definition.
//!
//! A language is a core when all its unary polymorphisms are
//! bijections; any language reduces to one by applying a minimal-range
//! unary polymorphism. Over a core, constant constraints x = a can be
//! eliminated: introduce variables z₀,…,z_{k−1}, rewrite x = a to
//! x = z_a, and pin the z's down with the σ-conjunction of all
//! language atoms.
//!
//! Run with `cargo run --example core_reduction`.

use finalg::closure::eval_pp_formula;
use finalg::model::parse_language;
use finalg::solver::{brute_force_solve, BruteOutcome, CSPInstance, BRUTE_NODE_LIMIT};
use finalg::transform::{add_constants_instance, core_of, sigma_definition};
use finalg::Relation;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let load = |name: &str| {
        parse_language(&std::fs::read_to_string(format!("{dir}/{name}")).unwrap()).unwrap()
    };

    // {<=} collapses to a one-element core; {NAE3} is already a core.
    for name in ["leq.lang", "nae.lang"] {
        let lang = load(name);
        let core = core_of(&lang);
        println!(
            "{name}: f = {:?}, core domain size {}",
            core.f.table, core.core.domain.size
        );
    }

    let nae = load("nae.lang");
    let sigma = sigma_definition(&nae);
    println!(
        "sigma over {{NAE3}} evaluates to {} (the unary polymorphisms)",
        eval_pp_formula(&nae, &sigma).unwrap()
    );

    // x = 0 and NAE3(x, y, y), rewritten without constant relations
    let mut inst = CSPInstance::new(2);
    inst.add_variable("x", None).unwrap();
    inst.add_variable("y", None).unwrap();
    inst.add_constraint("c0", Relation::unary(2, [0]), vec![0]).unwrap();
    inst.add_constraint("nae3", nae.relation("nae3").unwrap().clone(), vec![0, 1, 1]).unwrap();
    let rewritten = add_constants_instance(&inst, &nae);
    println!("rewritten instance:\n{}", rewritten.format_instance());
    for (label, i) in [("original", &inst), ("rewritten", &rewritten)] {
        let sat = matches!(brute_force_solve(i, BRUTE_NODE_LIMIT), BruteOutcome::Sat(_));
        println!("{label}: satisfiable = {sat}");
    }
}
