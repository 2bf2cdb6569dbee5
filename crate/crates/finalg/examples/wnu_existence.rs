//! WNU term existence via blockers, cross-checked by the indicator
//! construction.
//!
//! A weak near-unanimity (WNU) term of arity n exists iff no
//! WNU-blocker and no p-blocker (for p dividing n) is invariant. The
//! xor algebra carries the 2-blocker, so it has WNUs exactly at the
//! odd arities; the majority algebra has them everywhere.
//!
//! Run with `cargo run --example wnu_existence`.

use finalg::closure::{ClosureBudget, SearchOutcome};
use finalg::wnu::{
    find_p_wnu_blocker, find_wnu_blocker, has_wnu_of_arity, wnu_indicator_search, WnuExistence,
};
use finalg::{Algebra, Domain, Operation};

fn main() {
    let xor = Algebra::new(
        Domain::new(2),
        vec![Operation::from_fn("xor3", 3, 2, |a| a[0] ^ a[1] ^ a[2])],
    )
    .unwrap();
    let maj = Algebra::new(
        Domain::new(2),
        vec![Operation::from_fn("maj", 3, 2, |a| {
            usize::from(a.iter().sum::<usize>() >= 2)
        })],
    )
    .unwrap();

    for (name, alg) in [("xor", &xor), ("majority", &maj)] {
        println!("{name}:");
        println!("  wnu_blocker   = {:?}", find_wnu_blocker(alg));
        println!("  p_wnu_blocker = {:?}", find_p_wnu_blocker(alg, None));
        for n in 3..=6 {
            let by_blockers = has_wnu_of_arity(alg, n);
            // independent check: build the indicator problem and close it
            let by_indicator = wnu_indicator_search(alg, n, ClosureBudget::default());
            let agree = matches!(
                (&by_blockers, &by_indicator),
                (WnuExistence::Exists, SearchOutcome::Found(_))
                    | (WnuExistence::Blocked(_), SearchOutcome::No)
            );
            println!(
                "  arity {n}: wnu exists = {:5} (indicator agrees: {agree})",
                by_blockers.exists()
            );
        }
    }
}
