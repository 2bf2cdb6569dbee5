//! Bounded pp-definability search and its certified negatives.
//!
//! By the Inv–Pol Galois connection, a relation is pp-definable over a
//! language exactly when it is preserved by all of the language's
//! polymorphisms. The search is best-effort: breadth-first over small
//! formulas for positives, and a violating polymorphism as an
//! irrefutable certificate for negatives.
//!
//! Run with `cargo run --example pp_definability`.

use finalg::model::parse_language;
use finalg::transform::{pp_definability_search, PPSearch, PPSearchCaps};
use finalg::Relation;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let load = |name: &str| {
        parse_language(&std::fs::read_to_string(format!("{dir}/{name}")).unwrap()).unwrap()
    };
    let nae = load("nae.lang");
    let aff = load("aff_z2.lang");
    let neq = Relation::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap();
    let nae3 = nae.relation("nae3").unwrap().clone();

    let caps = PPSearchCaps::default();
    for (lang_name, lang, target_name, target) in [
        ("{NAE3}", &nae, "!=", &neq),
        ("{NAE3}", &nae, "Eq", &Relation::equality(2)),
        ("{aff, constants}", &aff, "NAE3", &nae3),
    ] {
        print!("{target_name} over {lang_name}: ");
        match pp_definability_search(lang, target, caps) {
            PPSearch::Found(f) => println!(
                "definable with {} atoms, {} existential variables",
                f.atoms.len(),
                f.existential_count
            ),
            PPSearch::Impossible(op) => println!(
                "not definable — violating polymorphism {:?} (arity {})",
                op.table, op.arity
            ),
            PPSearch::Unknown => println!("unknown within the caps"),
        }
    }
}
