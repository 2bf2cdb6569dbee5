//! Acceptance gate: the eleven headline behaviors, one test each,
//! printing a single pass line on success (run with `--nocapture` to
//! see them). Every criterion checks library output against either an
//! exact hand-verifiable value or an independent brute-force oracle.

mod common;

use finalg::closure::{enumerate_polymorphisms, ClosureBudget, PolymorphismSpec, SearchOutcome};
use finalg::model::{Atom, PPFormula};
use finalg::solver::{
    brute_force_solve, check_cc, solve, BruteOutcome, CSPInstance, SolveOutcome, BRUTE_NODE_LIMIT,
};
use finalg::structure::{find_strong_subuniverse, is_binary_absorbing, StrongSubuniverseOutcome};
use finalg::transform::{add_constants_instance, core_of, linear_counterexample, nae_gadget, nae_instance};
use finalg::wnu::{has_wnu_of_arity, is_wnu, two_blocker_from_blocker, wnu_indicator_search, Blocker};
use finalg::{ConstraintLanguage, Domain, Operation, Relation};
use rand::prelude::*;

fn pass(n: usize, what: &str) {
    println!("criterion {n} ({what}): PASS");
}

fn aff_language(k: usize) -> ConstraintLanguage {
    ConstraintLanguage::new(
        Domain::new(k),
        vec![
            ("aff".to_string(), common::r_aff(k)),
            ("c0".to_string(), Relation::unary(k, [0])),
            ("c1".to_string(), Relation::unary(k, [1])),
        ],
    )
    .unwrap()
}

fn is_sat(inst: &CSPInstance) -> bool {
    match brute_force_solve(inst, BRUTE_NODE_LIMIT) {
        BruteOutcome::Sat(_) => true,
        BruteOutcome::Unsat => false,
        BruteOutcome::LimitExceeded => panic!("oracle node limit exceeded"),
    }
}

#[test]
fn criterion_01_linear_counterexample() {
    for k in [2usize, 3] {
        let lang = aff_language(k);
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
        assert!(!is_sat(&inst), "Z{k} counterexample must be unsatisfiable");
        assert!(
            matches!(solve(&inst), SolveOutcome::Ok { .. }),
            "Solve must answer Ok on the Z{k} counterexample"
        );
    }
    pass(1, "linear counterexample: brute Unsat, solve Ok over Z2 and Z3");
}

#[test]
fn criterion_02_solver_soundness() {
    let mut rng = common::rng(0x5eed_0002);
    let mut no_solution = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(2..=3);
        let inst = common::random_instance(&mut rng, k, 8, 10);
        if solve(&inst).is_no_solution() {
            no_solution += 1;
            assert!(!is_sat(&inst), "solve reported NoSolution on a satisfiable instance");
        }
    }
    assert!(no_solution > 50, "corpus too easy: only {no_solution} NoSolution outcomes");
    pass(2, "solver soundness on 1000 random instances");
}

#[test]
fn criterion_03_majority_language_completeness() {
    let maj = Operation::from_fn("maj", 3, 2, |a| usize::from(a.iter().sum::<usize>() >= 2));
    // every nonempty Boolean relation of arity <= 2 preserved by majority
    let mut pool = Vec::new();
    for arity in 1..=2usize {
        let count = 1usize << (1 << arity);
        for mask in 1..count {
            let tuples = (0..(1 << arity))
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| finalg::model::decode_args(i, arity, 2))
                .collect();
            let rel = Relation::new(arity, 2, tuples).unwrap();
            if finalg::model::preserves(&maj, &rel).unwrap().holds() {
                pool.push(rel);
            }
        }
    }
    assert!(pool.len() > 10);
    let mut rng = common::rng(0x5eed_0003);
    let (mut sat, mut unsat) = (0, 0);
    for _ in 0..500 {
        let nv = rng.gen_range(2..=8);
        let inst = common::instance_from_pool(&mut rng, 2, nv, 10, &pool);
        let oracle = is_sat(&inst);
        let solver = !solve(&inst).is_no_solution();
        assert_eq!(solver, oracle, "solver disagrees with the oracle on {inst:?}");
        if oracle { sat += 1 } else { unsat += 1 }
    }
    assert!(sat > 50 && unsat > 50, "corpus unbalanced: {sat} sat / {unsat} unsat");
    pass(3, "solve decides 500 majority-preserved Boolean instances exactly");
}

#[test]
fn criterion_04_strong_subuniverse_totality() {
    let budget = ClosureBudget::default();
    for alg in common::ternary_boolean_algebras() {
        assert!(
            matches!(find_strong_subuniverse(&alg, budget), StrongSubuniverseOutcome::Witness(_)),
            "no strong subuniverse witness for {:?}",
            alg.ops[0].table
        );
    }
    let mut rng = common::rng(0x5eed_0004);
    for _ in 0..200 {
        let alg = common::random_idempotent_ternary(&mut rng, 3);
        assert!(
            matches!(find_strong_subuniverse(&alg, budget), StrongSubuniverseOutcome::Witness(_)),
            "no strong subuniverse witness for {:?}",
            alg.ops[0].table
        );
    }
    pass(4, "strong subuniverse found for all 64 Boolean and 200 random k=3 algebras");
}

#[test]
fn criterion_05_wnu_blockers_vs_indicator() {
    let budget = ClosureBudget::default();
    for alg in common::ternary_boolean_algebras() {
        for n in 3..=6 {
            let by_blockers = has_wnu_of_arity(&alg, n).exists();
            match wnu_indicator_search(&alg, n, budget) {
                SearchOutcome::Found(op) => {
                    assert!(is_wnu(&op));
                    assert!(by_blockers, "indicator found a WNU a blocker should forbid");
                }
                SearchOutcome::No => {
                    assert!(!by_blockers, "blocker route claims a WNU the indicator refutes");
                }
                SearchOutcome::Inconclusive => panic!("indicator budget exhausted"),
            }
        }
    }
    pass(5, "blocker route matches the indicator oracle on 64 algebras, arities 3-6");
}

#[test]
fn criterion_06_binary_absorption_vs_term_scan() {
    let budget = ClosureBudget::default();
    for alg in common::ternary_boolean_algebras() {
        // the binary part of the clone: close {pi1, pi2} under f
        let f = &alg.ops[0];
        let mut clone2: Vec<[usize; 4]> = vec![[0, 0, 1, 1], [0, 1, 0, 1]];
        let mut grew = true;
        while grew {
            grew = false;
            let snapshot = clone2.clone();
            for a in &snapshot {
                for b in &snapshot {
                    for c in &snapshot {
                        let mut t = [0usize; 4];
                        for i in 0..4 {
                            t[i] = f.eval(&[a[i], b[i], c[i]]);
                        }
                        if !clone2.contains(&t) {
                            clone2.push(t);
                            grew = true;
                        }
                    }
                }
            }
        }
        for b in [0usize, 1] {
            // t(b, x) = b = t(x, b) for all x; cells are (00,01,10,11)
            let direct = clone2.iter().any(|t| {
                (0..2).all(|x| t[b * 2 + x] == b && t[x * 2 + b] == b)
            });
            match is_binary_absorbing(&alg, &[b], budget).unwrap() {
                SearchOutcome::Found(_) => assert!(direct, "absorption claimed, no term exists"),
                SearchOutcome::No => assert!(!direct, "absorption missed for B={{{b}}}"),
                SearchOutcome::Inconclusive => panic!("absorption budget exhausted"),
            }
        }
    }
    pass(6, "binary absorption agrees with the exhaustive binary-term scan");
}

#[test]
fn criterion_07_two_blocker_construction() {
    let (relation, derived) = two_blocker_from_blocker(
        &Blocker::Wnu { b0: vec![0], b1: vec![1] },
        2,
    );
    assert_eq!(relation, common::r_aff(2), "expected the 8-tuple relation x1+x2=x3+x4");
    assert!(matches!(derived, Blocker::P { p: 2, s: 1, .. }));

    // the construction self-verifies on every WNU-blocker shape over k=3
    let mut scanned = 0;
    for m0 in 1u32..8 {
        for m1 in 1u32..8 {
            if m0 & m1 != 0 {
                continue;
            }
            let bits = |m: u32| (0..3).filter(|&i| m >> i & 1 == 1).collect::<Vec<usize>>();
            two_blocker_from_blocker(&Blocker::Wnu { b0: bits(m0), b1: bits(m1) }, 3);
            scanned += 1;
        }
    }
    assert_eq!(scanned, 12);
    pass(7, "Lemma 4.15 construction exact on k=2 and verified across the k=3 scan");
}

#[test]
fn criterion_08_check_cc_iteration_bound() {
    let mut rng = common::rng(0x5eed_0008);
    let mut instances: Vec<CSPInstance> = (0..300)
        .map(|_| {
            let k = rng.gen_range(2..=3);
            common::random_instance(&mut rng, k, 8, 10)
        })
        .collect();
    for k in [2usize, 3] {
        let lang = aff_language(k);
        let blocker = Blocker::P { s_set: (0..k).collect(), p: k, s: 1, phi: (0..k).collect() };
        let ppdef = PPFormula::new(
            4,
            0,
            vec![Atom::Rel { name: "aff".into(), vars: vec![0, 1, 2, 3] }],
        );
        instances.push(linear_counterexample(&lang, &blocker, &ppdef).unwrap());
    }
    for inst in &instances {
        let k = inst.domain_size as u32;
        let n = inst.var_count() as u64;
        let bound = (1u64 << (k * k)) * n * n;
        let iterations = check_cc(inst).table.iterations as u64;
        assert!(
            iterations <= bound,
            "CheckCC took {iterations} iterations, bound is {bound}"
        );
    }
    pass(8, "CheckCC stays within 2^(k*k) * |Var|^2 iterations on 302 instances");
}

#[test]
fn criterion_09_transform_equisatisfiability() {
    // core reduction (the f-image instance)
    let gamma = ConstraintLanguage::new(
        Domain::new(3),
        vec![(
            "neq01".to_string(),
            Relation::new(2, 3, vec![vec![0, 1], vec![1, 0]]).unwrap(),
        )],
    )
    .unwrap();
    let core = core_of(&gamma);
    assert_eq!(core.core.domain.size, 2);
    let pool = vec![gamma.relation("neq01").unwrap().clone()];
    let mut rng = common::rng(0x5eed_0009);
    for _ in 0..200 {
        let nv = rng.gen_range(2..=8);
        let inst = common::instance_from_pool(&mut rng, 3, nv, 10, &pool);
        assert_eq!(is_sat(&inst), is_sat(&core.map_instance(&inst)));
    }

    // constants restoration over the NAE core
    let nae_core = ConstraintLanguage::new(
        Domain::new(2),
        vec![("nae3".to_string(), common::nae3())],
    )
    .unwrap();
    for _ in 0..200 {
        let nv = rng.gen_range(2..=6);
        let mut inst = CSPInstance::new(2);
        for i in 0..nv {
            inst.add_variable(format!("x{i}"), None).unwrap();
        }
        for _ in 0..rng.gen_range(1..=8) {
            if rng.gen_bool(0.3) {
                let a = rng.gen_range(0..2usize);
                inst.add_constraint(
                    format!("c{a}"),
                    Relation::unary(2, [a]),
                    vec![rng.gen_range(0..nv)],
                )
                .unwrap();
            } else {
                let scope = (0..3).map(|_| rng.gen_range(0..nv)).collect();
                inst.add_constraint("nae3", common::nae3(), scope).unwrap();
            }
        }
        let rewritten = add_constants_instance(&inst, &nae_core);
        assert_eq!(is_sat(&inst), is_sat(&rewritten));
    }
    pass(9, "core images and constants restoration equisatisfiable on 200 instances each");
}

#[test]
fn criterion_10_gadget_fidelity() {
    let lang2 = ConstraintLanguage::new(
        Domain::new(2),
        vec![("nae3".to_string(), common::nae3())],
    )
    .unwrap();
    let blocker = Blocker::Wnu { b0: vec![0], b1: vec![1] };
    let ppdef2 = PPFormula::new(
        3,
        0,
        vec![Atom::Rel { name: "nae3".into(), vars: vec![0, 1, 2] }],
    );
    // the same blocker shape sitting inside a three-element domain
    let lang3 = ConstraintLanguage::new(
        Domain::new(3),
        vec![("naeb".to_string(), blocker.materialize(3))],
    )
    .unwrap();
    let ppdef3 = PPFormula::new(
        3,
        0,
        vec![Atom::Rel { name: "naeb".into(), vars: vec![0, 1, 2] }],
    );

    let mut rng = common::rng(0x5eed_0010);
    for _ in 0..100 {
        let nv = rng.gen_range(3..=10);
        let triples: Vec<[usize; 3]> = (0..rng.gen_range(1..=8))
            .map(|_| [0; 3].map(|_| rng.gen_range(1..=nv)))
            .collect();
        let source_sat = is_sat(&nae_instance(&triples));
        for (lang, ppdef) in [(&lang2, &ppdef2), (&lang3, &ppdef3)] {
            let gadget = nae_gadget(lang, &blocker, ppdef, &triples).unwrap();
            assert_eq!(is_sat(&gadget.instance), source_sat);
        }
    }
    pass(10, "NAE gadgets equisatisfiable with their sources on 100 instances");
}

#[test]
fn criterion_11_wnu_uniqueness_over_affine() {
    let spec = PolymorphismSpec { idempotent: true, wnu: true, ..Default::default() };

    let l2 = ConstraintLanguage::new(
        Domain::new(2),
        vec![("aff".to_string(), common::r_aff(2))],
    )
    .unwrap();
    let xor3 = Operation::from_fn("w", 3, 2, |a| (a[0] + a[1] + a[2]) % 2);
    match enumerate_polymorphisms(&l2, 3, spec, None) {
        SearchOutcome::Found(ops) => {
            assert_eq!(ops.len(), 1);
            assert_eq!(ops[0].table, xor3.table);
        }
        other => panic!("expected exactly x+y+z over Z2, got {other:?}"),
    }

    let l3 = ConstraintLanguage::new(
        Domain::new(3),
        vec![("aff".to_string(), common::r_aff(3))],
    )
    .unwrap();
    let sum4 = Operation::from_fn("w", 4, 3, |a| a.iter().sum::<usize>() % 3);
    match enumerate_polymorphisms(&l3, 4, spec, None) {
        SearchOutcome::Found(ops) => {
            assert_eq!(ops.len(), 1);
            assert_eq!(ops[0].table, sum4.table);
        }
        other => panic!("expected exactly x1+x2+x3+x4 over Z3, got {other:?}"),
    }
    pass(11, "the affine languages admit exactly the expected WNU polymorphisms");
}
