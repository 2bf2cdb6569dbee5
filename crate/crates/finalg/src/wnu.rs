//! WNU blockers and the three WNU-existence tests.
//!
//! A weak near-unanimity (WNU) term of arity `n` fails to exist exactly
//! when the algebra has an invariant blocker relation: either the
//! NAE-style ternary relation of a `WnuBlocker`, or the 4-ary linear
//! relation of a `PBlocker` for some prime `p` dividing `n`. Blocker
//! enumeration is exact and polynomial in `3^k·k^k`; the indicator
//! closure is kept as an independent budgeted cross-check.

use crate::closure::{self, ClosureBudget, ClosureOutcome, SearchOutcome};
use crate::model::{self, Algebra, ConstraintLanguage, Domain, Operation, PPFormula, Relation};
use crate::structure;
use serde::Serialize;

/// An obstruction to WNU terms: a pair of disjoint sets whose
/// not-all-equal relation is invariant, or a subuniverse with a
/// surjection onto `Z_p^s` whose linear relation is invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type")]
pub enum Blocker {
    #[serde(rename = "wnu")]
    Wnu { b0: Vec<usize>, b1: Vec<usize> },
    #[serde(rename = "p")]
    P {
        /// The carrier subuniverse `S`, sorted.
        s_set: Vec<usize>,
        p: usize,
        s: usize,
        /// `phi[i]` is the image of `s_set[i]` in `Z_p^s`, radix-`p` encoded.
        phi: Vec<usize>,
    },
}

impl Blocker {
    /// The invariant relation the blocker denotes:
    /// `(B₀∪B₁)³ ∖ (B₀³∪B₁³)` or
    /// `{(a₁,a₂,a₃,a₄) ∈ S⁴ : φ(a₁)+φ(a₂)=φ(a₃)+φ(a₄)}`.
    pub fn materialize(&self, domain_size: usize) -> Relation {
        match self {
            Blocker::Wnu { b0, b1 } => {
                let side = |v: usize| {
                    if b0.contains(&v) {
                        Some(0)
                    } else if b1.contains(&v) {
                        Some(1)
                    } else {
                        None
                    }
                };
                let tuples = (0..domain_size.pow(3))
                    .map(|i| model::decode_args(i, 3, domain_size))
                    .filter(|t| {
                        let sides: Option<Vec<usize>> = t.iter().map(|&v| side(v)).collect();
                        match sides {
                            Some(s) => s.iter().any(|&x| x == 0) && s.iter().any(|&x| x == 1),
                            None => false,
                        }
                    })
                    .collect();
                Relation::new(3, domain_size, tuples).unwrap()
            }
            Blocker::P { s_set, p, s, phi } => {
                let value = |v: usize| {
                    s_set
                        .iter()
                        .position(|&x| x == v)
                        .map(|i| model::decode_args(phi[i], *s, *p))
                };
                let add = |a: &[usize], b: &[usize]| -> Vec<usize> {
                    a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
                };
                let tuples = (0..domain_size.pow(4))
                    .map(|i| model::decode_args(i, 4, domain_size))
                    .filter(|t| {
                        let imgs: Option<Vec<Vec<usize>>> = t.iter().map(|&v| value(v)).collect();
                        match imgs {
                            Some(im) => add(&im[0], &im[1]) == add(&im[2], &im[3]),
                            None => false,
                        }
                    })
                    .collect();
                Relation::new(4, domain_size, tuples).unwrap()
            }
        }
    }
}

fn invariant(alg: &Algebra, rel: &Relation) -> bool {
    alg.ops
        .iter()
        .all(|op| model::preserves(op, rel).unwrap().holds())
}

/// Scans all ordered pairs of disjoint nonempty subsets (up to the
/// `B₀ ↔ B₁` symmetry, in lexicographic order) for an invariant
/// WNU-blocker relation. Exact.
pub fn find_wnu_blocker(alg: &Algebra) -> Option<Blocker> {
    let k = alg.size();
    let mut candidates: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for m0 in 1usize..1 << k {
        for m1 in 1usize..1 << k {
            if m0 & m1 != 0 {
                continue;
            }
            let b0: Vec<usize> = (0..k).filter(|&v| m0 >> v & 1 == 1).collect();
            let b1: Vec<usize> = (0..k).filter(|&v| m1 >> v & 1 == 1).collect();
            if b0[0] > b1[0] {
                continue; // symmetric pair handled with the sides swapped
            }
            candidates.push((b0, b1));
        }
    }
    candidates.sort();
    for (b0, b1) in candidates {
        let blocker = Blocker::Wnu { b0, b1 };
        if invariant(alg, &blocker.materialize(k)) {
            return Some(blocker);
        }
    }
    None
}

/// Enumerates all surjections `0..n -> 0..m` in lexicographic order.
fn surjections(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut f = vec![0usize; n];
    loop {
        let mut hit = vec![false; m];
        for &v in &f {
            hit[v] = true;
        }
        if hit.iter().all(|&h| h) {
            out.push(f.clone());
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            f[pos] += 1;
            if f[pos] < m {
                break;
            }
            f[pos] = 0;
        }
    }
}

/// Scans all subuniverses `S`, prime powers `p^s ≤ |S|` (optionally
/// restricted to one prime), and surjections `φ: S → Z_p^s` for an
/// invariant linear blocker relation. Surjections producing the same
/// materialized relation (the `Aut(Z_p^s)` orbit) are deduplicated.
/// Exact.
pub fn find_p_wnu_blocker(alg: &Algebra, prime: Option<usize>) -> Option<Blocker> {
    let k = alg.size();
    for s_set in structure::subuniverses(alg) {
        if s_set.len() < 2 {
            continue;
        }
        for p in 2..=s_set.len() {
            if (2..p).any(|d| p % d == 0) {
                continue;
            }
            if let Some(want) = prime {
                if p != want {
                    continue;
                }
            }
            let mut s = 1;
            while p.pow(s as u32) <= s_set.len() {
                let mut seen: Vec<Relation> = Vec::new();
                for phi in surjections(s_set.len(), p.pow(s as u32)) {
                    let blocker = Blocker::P {
                        s_set: s_set.clone(),
                        p,
                        s,
                        phi,
                    };
                    let rel = blocker.materialize(k);
                    if seen.contains(&rel) {
                        continue;
                    }
                    seen.push(rel.clone());
                    if invariant(alg, &rel) {
                        return Some(blocker);
                    }
                }
                s += 1;
            }
        }
    }
    None
}

/// Existence of a WNU term of one arity: either it exists (Theorem
/// 4.16: no blocker applies) or a blocker certifies its absence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WnuExistence {
    Exists,
    Blocked(Blocker),
}

impl WnuExistence {
    pub fn exists(&self) -> bool {
        matches!(self, WnuExistence::Exists)
    }
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Theorem 4.16: a WNU term of arity `n ≥ 3` exists iff there is no
/// WNU-blocker and no p-blocker for any prime `p` dividing `n`. Exact.
pub fn has_wnu_of_arity(alg: &Algebra, n: usize) -> WnuExistence {
    assert!(n >= 3, "WNU arity must be at least 3");
    assert!(alg.is_idempotent(), "the WNU theorems need an idempotent algebra");
    if let Some(b) = find_wnu_blocker(alg) {
        return WnuExistence::Blocked(b);
    }
    for p in prime_divisors(n) {
        if let Some(b) = find_p_wnu_blocker(alg, Some(p)) {
            return WnuExistence::Blocked(b);
        }
    }
    WnuExistence::Exists
}

/// Theorem 4.17: WNU terms of every prime arity exist iff there is no
/// WNU-blocker.
pub fn has_wnu_some(alg: &Algebra) -> bool {
    assert!(alg.is_idempotent());
    find_wnu_blocker(alg).is_none()
}

/// Theorem 4.18: WNU terms of all arities `≥ 3` exist iff there is no
/// blocker of either kind.
pub fn has_wnu_all(alg: &Algebra) -> bool {
    assert!(alg.is_idempotent());
    find_wnu_blocker(alg).is_none() && find_p_wnu_blocker(alg, None).is_none()
}

/// Lemma 4.15: from a WNU-blocker, pp-define the 2-blocker relation.
///
/// Evaluates `R″(x₁,x₂,x₃,x₄) = ∃y∃z R(x₁,x₂,y) ∧ R(x₃,x₃,z) ∧ R(x₄,y,z)`
/// and then `R′ = R″(x₁,x₂,x₃,x₄) ∧ R″(x₁,x₂,x₄,x₃) ∧ R″(x₃,x₄,x₁,x₂) ∧
/// R″(x₃,x₄,x₂,x₁)`, and verifies that `R′` is exactly the materialized
/// `PBlocker(p=2, s=1)` with `φ(B₀)=0, φ(B₁)=1`. A verification failure
/// would contradict the lemma and panics.
pub fn two_blocker_from_blocker(blocker: &Blocker, domain_size: usize) -> (Relation, Blocker) {
    let Blocker::Wnu { b0, b1 } = blocker else {
        panic!("two_blocker_from_blocker needs a WNU-blocker");
    };
    let r = blocker.materialize(domain_size);
    let lang = ConstraintLanguage::new(
        Domain::new(domain_size),
        vec![("R".to_string(), r)],
    )
    .unwrap();
    let atom = |vars: Vec<usize>| model::Atom::Rel {
        name: "R".to_string(),
        vars,
    };
    let rpp = closure::eval_pp_formula(
        &lang,
        &PPFormula::new(4, 2, vec![atom(vec![0, 1, 4]), atom(vec![2, 2, 5]), atom(vec![3, 4, 5])]),
    )
    .unwrap();
    let lang2 = ConstraintLanguage::new(
        Domain::new(domain_size),
        vec![("Rpp".to_string(), rpp)],
    )
    .unwrap();
    let atom2 = |vars: Vec<usize>| model::Atom::Rel {
        name: "Rpp".to_string(),
        vars,
    };
    let rprime = closure::eval_pp_formula(
        &lang2,
        &PPFormula::new(
            4,
            0,
            vec![
                atom2(vec![0, 1, 2, 3]),
                atom2(vec![0, 1, 3, 2]),
                atom2(vec![2, 3, 0, 1]),
                atom2(vec![2, 3, 1, 0]),
            ],
        ),
    )
    .unwrap();
    let mut s_set: Vec<usize> = b0.iter().chain(b1).copied().collect();
    s_set.sort_unstable();
    let phi = s_set
        .iter()
        .map(|v| usize::from(b1.contains(v)))
        .collect();
    let two_blocker = Blocker::P {
        s_set,
        p: 2,
        s: 1,
        phi,
    };
    assert_eq!(
        rprime,
        two_blocker.materialize(domain_size),
        "Lemma 4.15 verification failed"
    );
    (rprime, two_blocker)
}

/// The indicator-closure cross-check for WNU existence (Lemmas 4.8/4.9):
/// generate, inside `(A^(k²))^n`, from the `n` tuples that place the
/// all-pairs second-component column `β` in one block and the
/// first-component column `α` elsewhere, with the goal of a tuple whose
/// `n` blocks are all equal. A witnessing term is an `n`-ary WNU.
pub fn wnu_indicator_search(
    alg: &Algebra,
    n: usize,
    budget: ClosureBudget,
) -> SearchOutcome<Operation> {
    assert!(n >= 3);
    assert!(alg.is_idempotent());
    let k = alg.size();
    let block = k * k;
    let mut alpha = Vec::with_capacity(block);
    let mut beta = Vec::with_capacity(block);
    for a in 0..k {
        for b in 0..k {
            alpha.push(a);
            beta.push(b);
        }
    }
    let generators: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut t = Vec::with_capacity(n * block);
            for j in 0..n {
                t.extend_from_slice(if j == i { &beta } else { &alpha });
            }
            t
        })
        .collect();
    let generators = Relation::new(n * block, k, generators).unwrap();
    let goal = |t: &[usize]| {
        let first = &t[..block];
        t.chunks(block).all(|c| c == first)
    };
    match closure::sg_closure(alg, &generators, Some(&goal), budget) {
        ClosureOutcome::GoalFound { witness, .. } => {
            SearchOutcome::Found(witness.induced_operation(alg, "w"))
        }
        ClosureOutcome::Complete(_) => SearchOutcome::No,
        ClosureOutcome::Exhausted => SearchOutcome::Inconclusive,
    }
}

/// Checks the WNU identities `w(y,x,…,x) = w(x,y,x,…,x) = …` plus
/// idempotency on an explicit table.
pub fn is_wnu(op: &Operation) -> bool {
    let k = op.domain_size;
    let n = op.arity;
    if !op.is_idempotent() {
        return false;
    }
    for x in 0..k {
        for y in 0..k {
            let mut first = vec![x; n];
            first[0] = y;
            let expected = op.eval(&first);
            for pos in 1..n {
                let mut args = vec![x; n];
                args[pos] = y;
                if op.eval(&args) != expected {
                    return false;
                }
            }
        }
    }
    true
}
