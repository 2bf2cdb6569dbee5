//! Shared corpus generators for the integration suites. All randomness
//! is seeded ChaCha so every run sees the same corpus.

// Each integration test binary compiles its own copy; not every binary
// uses every helper.
#![allow(dead_code)]

use finalg::solver::CSPInstance;
use finalg::{Algebra, Domain, Operation, Relation};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random nonempty relation: every tuple kept with probability 1/2.
pub fn random_relation(rng: &mut ChaCha8Rng, arity: usize, k: usize) -> Relation {
    let count = k.pow(arity as u32);
    let mut tuples: Vec<Vec<usize>> = (0..count)
        .filter(|_| rng.gen_bool(0.5))
        .map(|i| finalg::model::decode_args(i, arity, k))
        .collect();
    if tuples.is_empty() {
        tuples.push((0..arity).map(|_| rng.gen_range(0..k)).collect());
    }
    Relation::new(arity, k, tuples).unwrap()
}

/// A random instance over freshly generated random relations.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    k: usize,
    max_vars: usize,
    max_constraints: usize,
) -> CSPInstance {
    let nv = rng.gen_range(2..=max_vars);
    let relations: Vec<Relation> = (0..3)
        .map(|_| {
            let arity = rng.gen_range(1..=3);
            random_relation(rng, arity, k)
        })
        .collect();
    instance_from_pool(rng, k, nv, max_constraints, &relations)
}

/// A random instance whose constraints draw from a fixed relation pool.
pub fn instance_from_pool(
    rng: &mut ChaCha8Rng,
    k: usize,
    nv: usize,
    max_constraints: usize,
    pool: &[Relation],
) -> CSPInstance {
    let mut inst = CSPInstance::new(k);
    for i in 0..nv {
        inst.add_variable(format!("x{i}"), None).unwrap();
    }
    for c in 0..rng.gen_range(1..=max_constraints) {
        let rel = pool[rng.gen_range(0..pool.len())].clone();
        let scope = (0..rel.arity).map(|_| rng.gen_range(0..nv)).collect();
        inst.add_constraint(format!("r{c}"), rel, scope).unwrap();
    }
    inst
}

/// All 64 idempotent algebras with one ternary operation on {0, 1}.
pub fn ternary_boolean_algebras() -> Vec<Algebra> {
    let mut out = Vec::with_capacity(64);
    for code in 0..64u32 {
        let mut table = vec![0usize; 8];
        table[7] = 1; // f(1,1,1) = 1; f(0,0,0) = 0 already
        let mut bit = 0;
        for idx in 1..7 {
            table[idx] = (code >> bit & 1) as usize;
            bit += 1;
        }
        out.push(
            Algebra::new(Domain::new(2), vec![Operation::new("f", 3, 2, table).unwrap()])
                .unwrap(),
        );
    }
    out
}

/// A random idempotent algebra with one ternary operation on 0..k-1.
pub fn random_idempotent_ternary(rng: &mut ChaCha8Rng, k: usize) -> Algebra {
    let cells = k * k * k;
    let mut table: Vec<usize> = (0..cells).map(|_| rng.gen_range(0..k)).collect();
    for a in 0..k {
        table[a * k * k + a * k + a] = a;
    }
    Algebra::new(Domain::new(k), vec![Operation::new("f", 3, k, table).unwrap()]).unwrap()
}

/// The affine relation x1 + x2 = x3 + x4 over Z_k.
pub fn r_aff(k: usize) -> Relation {
    let tuples = (0..k.pow(4))
        .map(|i| finalg::model::decode_args(i, 4, k))
        .filter(|t| (t[0] + t[1]) % k == (t[2] + t[3]) % k)
        .collect();
    Relation::new(4, k, tuples).unwrap()
}

/// The ternary Boolean not-all-equal relation.
pub fn nae3() -> Relation {
    let tuples = (0..8)
        .map(|i| finalg::model::decode_args(i, 3, 2))
        .filter(|t| t.iter().any(|&v| v == 0) && t.iter().any(|&v| v == 1))
        .collect();
    Relation::new(3, 2, tuples).unwrap()
}
