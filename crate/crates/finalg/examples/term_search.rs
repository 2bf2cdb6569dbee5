//! Term search through subpower closures: Maltsev terms and the full
//! enumeration of WNU polymorphisms.
//!
//! A Maltsev term m(x,x,y) = y = m(y,x,x) is found by closing the
//! generators of the free algebra on two variables and watching for
//! the right column pattern; the witness is a derivation that can be
//! replayed into an explicit operation table. The second half
//! enumerates all idempotent WNU polymorphisms of the affine language
//! over Z2 at arity 3 — there is exactly one, x ⊕ y ⊕ z.
//!
//! Run with `cargo run --example term_search`.

use finalg::closure::{enumerate_polymorphisms, has_maltsev_term, ClosureBudget, PolymorphismSpec, SearchOutcome};
use finalg::model::parse_language;
use finalg::{Algebra, Domain, Operation};

fn main() {
    let xor = Algebra::new(
        Domain::new(2),
        vec![Operation::from_fn("xor3", 3, 2, |a| a[0] ^ a[1] ^ a[2])],
    )
    .unwrap();
    let min = Algebra::new(
        Domain::new(2),
        vec![Operation::from_fn("min", 2, 2, |a| a[0].min(a[1]))],
    )
    .unwrap();

    for (name, alg) in [("xor", &xor), ("min", &min)] {
        match has_maltsev_term(alg, ClosureBudget::default()) {
            SearchOutcome::Found(witness) => {
                let m = witness.induced_operation(alg, "m");
                println!("{name}: Maltsev term with table {:?}", m.table);
            }
            SearchOutcome::No => println!("{name}: no Maltsev term"),
            SearchOutcome::Inconclusive => println!("{name}: budget exhausted"),
        }
    }

    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let lang = parse_language(
        &std::fs::read_to_string(format!("{dir}/aff_z2.lang")).unwrap(),
    )
    .unwrap();
    let spec = PolymorphismSpec { idempotent: true, wnu: true, ..Default::default() };
    match enumerate_polymorphisms(&lang, 3, spec, None) {
        SearchOutcome::Found(ops) => {
            println!("idempotent arity-3 WNU polymorphisms of aff_z2 + constants:");
            for op in &ops {
                println!("  {:?}", op.table);
            }
        }
        other => println!("unexpected outcome: {other:?}"),
    }
}
