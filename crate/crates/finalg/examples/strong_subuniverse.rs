//! Strong subuniverse detection on three classic two- and
//! three-element algebras.
//!
//! Every finite idempotent algebra with at least two elements has a
//! strong subset of one of five kinds: binary absorbing, central,
//! PC-block, p-affine quotient, or projective. This example runs the
//! detector on the meet-semilattice, the xor algebra, and the
//! rock-paper-scissors algebra, which hit three different branches.
//!
//! Run with `cargo run --example strong_subuniverse`.

use finalg::closure::ClosureBudget;
use finalg::structure::{find_strong_subuniverse, StrongSubuniverseOutcome, StrongSubuniverseWitness};
use finalg::{Algebra, Domain, Operation};

fn main() {
    let min = Algebra::new(
        Domain::new(2),
        vec![Operation::from_fn("min", 2, 2, |a| a[0].min(a[1]))],
    )
    .unwrap();

    let xor = Algebra::new(
        Domain::new(2),
        vec![Operation::from_fn("xor3", 3, 2, |a| a[0] ^ a[1] ^ a[2])],
    )
    .unwrap();

    // w(a, b) = the winner of a rock-paper-scissors round
    let rps = Algebra::new(
        Domain::new(3),
        vec![Operation::from_fn("w", 2, 3, |a| {
            if (a[0] + 2) % 3 == a[1] {
                a[0]
            } else if (a[1] + 2) % 3 == a[0] {
                a[1]
            } else {
                a[0]
            }
        })],
    )
    .unwrap();

    for (name, alg) in [("min", &min), ("xor", &xor), ("rps", &rps)] {
        println!("{name}:");
        match find_strong_subuniverse(alg, ClosureBudget::default()) {
            StrongSubuniverseOutcome::Witness(w) => describe(&w),
            StrongSubuniverseOutcome::Exhausted => println!("  budget exhausted"),
        }
    }
}

fn describe(witness: &StrongSubuniverseWitness) {
    match witness {
        StrongSubuniverseWitness::BinaryAbsorbing { subset, term, .. } => {
            println!("  binary absorbing subuniverse {subset:?} via term {:?}", term.table);
        }
        StrongSubuniverseWitness::Central(c) => {
            println!("  central subuniverse {:?}", c.subset);
        }
        StrongSubuniverseWitness::PC { block, .. } => {
            println!("  PC block {block:?}");
        }
        StrongSubuniverseWitness::PAffineQuotient { p, s, phi, .. } => {
            println!("  p-affine quotient: p = {p}, s = {s}, phi = {phi:?}");
        }
        StrongSubuniverseWitness::Projective { subset, coords } => {
            println!("  projective subuniverse {subset:?} (coords {coords:?})");
        }
    }
}
