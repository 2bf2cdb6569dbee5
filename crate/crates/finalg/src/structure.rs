//! Congruences, quotients, subuniverse enumeration, and the strong
//! subuniverse detectors: binary absorbing, central, projective, PC,
//! and p-affine quotients, with the five-case driver that every
//! idempotent algebra of size at least two must satisfy.

use crate::closure::{self, ClosureBudget, ClosureOutcome, SearchOutcome, TermWitness};
use crate::model::{
    self, decode_args, Algebra, Domain, ModelError, Operation, Relation, Result,
};
use serde::Serialize;

/// A congruence: a partition of the domain preserved by every basic
/// operation. Blocks are listed in order of their least elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Congruence {
    pub block_of: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

impl Congruence {
    /// Builds a congruence value (not yet validated against an algebra)
    /// from a block-index vector, normalizing block labels to order of
    /// first occurrence.
    pub fn from_block_of(raw: &[usize]) -> Self {
        let mut labels: Vec<usize> = Vec::new();
        let mut block_of = Vec::with_capacity(raw.len());
        for &b in raw {
            let idx = match labels.iter().position(|&l| l == b) {
                Some(i) => i,
                None => {
                    labels.push(b);
                    labels.len() - 1
                }
            };
            block_of.push(idx);
        }
        let mut blocks = vec![Vec::new(); labels.len()];
        for (elem, &b) in block_of.iter().enumerate() {
            blocks[b].push(elem);
        }
        Congruence { block_of, blocks }
    }

    pub fn equality(k: usize) -> Self {
        Congruence::from_block_of(&(0..k).collect::<Vec<_>>())
    }

    pub fn full(k: usize) -> Self {
        Congruence::from_block_of(&vec![0; k])
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_equality(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    pub fn is_full(&self) -> bool {
        self.blocks.len() <= 1
    }

    /// Trivial means equality or the full square.
    pub fn is_trivial(&self) -> bool {
        self.is_equality() || self.is_full()
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    /// Whether every basic operation of `alg` preserves the partition.
    pub fn is_congruence_of(&self, alg: &Algebra) -> bool {
        let k = alg.size();
        if self.block_of.len() != k {
            return false;
        }
        // one-coordinate substitution suffices by transitivity
        for op in &alg.ops {
            let m = op.arity;
            for idx in 0..k.pow(m as u32) {
                let args = decode_args(idx, m, k);
                let value = op.eval(&args);
                for pos in 0..m {
                    for b in 0..k {
                        if !self.related(args[pos], b) {
                            continue;
                        }
                        let mut other = args.clone();
                        other[pos] = b;
                        if !self.related(value, op.eval(&other)) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Enumerates all congruences of the algebra, including the two trivial
/// ones, by scanning every partition (restricted growth strings).
pub fn congruences(alg: &Algebra) -> Vec<Congruence> {
    let k = alg.size();
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    loop {
        let cand = Congruence::from_block_of(&rgs);
        if cand.is_congruence_of(alg) {
            out.push(cand);
        }
        // next restricted growth string
        let mut pos = k;
        loop {
            if pos <= 1 {
                return out;
            }
            pos -= 1;
            let max_prefix = rgs[..pos].iter().copied().max().unwrap_or(0);
            if rgs[pos] <= max_prefix {
                rgs[pos] += 1;
                for slot in rgs.iter_mut().skip(pos + 1) {
                    *slot = 0;
                }
                break;
            }
            rgs[pos] = 0;
        }
    }
}

/// The factor algebra `A/σ` on block indices.
pub fn quotient(alg: &Algebra, sigma: &Congruence) -> Result<Algebra> {
    if !sigma.is_congruence_of(alg) {
        return Err(ModelError::NotCongruence);
    }
    let k = alg.size();
    let q = sigma.block_count();
    let reps: Vec<usize> = sigma.blocks.iter().map(|b| b[0]).collect();
    let ops = alg
        .ops
        .iter()
        .map(|op| {
            Operation::from_fn(op.name.clone(), op.arity, q, |blocks| {
                let args: Vec<usize> = blocks.iter().map(|&b| reps[b]).collect();
                sigma.block_of[op.eval(&args)]
            })
        })
        .collect::<Vec<_>>();
    // well-definedness: every concrete tuple must agree with the table
    for (op, qop) in alg.ops.iter().zip(&ops) {
        for idx in 0..k.pow(op.arity as u32) {
            let args = decode_args(idx, op.arity, k);
            let blocks: Vec<usize> = args.iter().map(|&a| sigma.block_of[a]).collect();
            if sigma.block_of[op.eval(&args)] != qop.eval(&blocks) {
                return Err(ModelError::NotCongruence);
            }
        }
    }
    Algebra::new(Domain::new(q), ops)
}

/// Whether the (sorted) subset is closed under every basic operation.
pub fn is_subuniverse(alg: &Algebra, b: &[usize]) -> bool {
    !b.is_empty()
        && b.iter().all(|&v| v < alg.size())
        && alg.ops.iter().all(|op| {
            let m = op.arity;
            let mut sel = vec![0usize; m];
            loop {
                let args: Vec<usize> = sel.iter().map(|&i| b[i]).collect();
                if !b.contains(&op.eval(&args)) {
                    return false;
                }
                let mut pos = m;
                loop {
                    if pos == 0 {
                        return true;
                    }
                    pos -= 1;
                    sel[pos] += 1;
                    if sel[pos] < b.len() {
                        break;
                    }
                    sel[pos] = 0;
                }
            }
        })
}

/// All nonempty subuniverses, sorted lexicographically as element lists.
pub fn subuniverses(alg: &Algebra) -> Vec<Vec<usize>> {
    let k = alg.size();
    let mut out: Vec<Vec<usize>> = (1usize..1 << k)
        .map(|mask| (0..k).filter(|&v| mask >> v & 1 == 1).collect::<Vec<_>>())
        .filter(|b| is_subuniverse(alg, b))
        .collect();
    out.sort();
    out
}

/// Nonempty proper subuniverses in lexicographic order — the candidate
/// list for the nontrivial detectors.
pub fn nontrivial_subuniverses(alg: &Algebra) -> Vec<Vec<usize>> {
    subuniverses(alg)
        .into_iter()
        .filter(|b| b.len() < alg.size())
        .collect()
}

/// The induced algebra on a subuniverse, with elements renumbered to
/// `0..|S|-1` in the order of the (sorted) subset.
pub fn subalgebra(alg: &Algebra, s: &[usize]) -> Result<Algebra> {
    if !is_subuniverse(alg, s) {
        return Err(ModelError::NotSubuniverse(s.to_vec()));
    }
    let index_of = |v: usize| s.iter().position(|&x| x == v).unwrap();
    let ops = alg
        .ops
        .iter()
        .map(|op| {
            Operation::from_fn(op.name.clone(), op.arity, s.len(), |args| {
                let concrete: Vec<usize> = args.iter().map(|&i| s[i]).collect();
                index_of(op.eval(&concrete))
            })
        })
        .collect();
    Algebra::new(Domain::new(s.len()), ops)
}

/// Tests whether the subuniverse `B` is an absorbing subuniverse with
/// some term of the given arity, via the indicator-matrix closure of
/// Lemma 3.3's proof: generate from the columns of the matrix `M` of
/// all tuples in `Aⁿ` with exactly one entry outside `B` and look for a
/// column lying entirely inside `B`.
///
/// `No` is exact (the closure reached a fixpoint); `Inconclusive` means
/// the budget ran out.
pub fn absorbs_with_arity(
    alg: &Algebra,
    b: &[usize],
    n: usize,
    budget: ClosureBudget,
) -> Result<SearchOutcome<TermWitness>> {
    if !is_subuniverse(alg, b) {
        return Err(ModelError::NotSubuniverse(b.to_vec()));
    }
    assert!(n >= 2, "absorption arity must be at least 2");
    let k = alg.size();
    if b.len() == k {
        // the whole algebra absorbs trivially via a projection
        return Ok(SearchOutcome::Found(TermWitness {
            generator_count: n,
            trace: Vec::new(),
            root: 0,
        }));
    }
    let outside: Vec<usize> = (0..k).filter(|v| !b.contains(v)).collect();
    // rows of M, block-ordered by the deviating position
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for dev in 0..n {
        let mut sel = vec![0usize; n];
        loop {
            let row: Vec<usize> = sel
                .iter()
                .enumerate()
                .map(|(i, &j)| if i == dev { outside[j] } else { b[j] })
                .collect();
            rows.push(row);
            let mut pos = n;
            loop {
                if pos == 0 {
                    sel.clear();
                    break;
                }
                pos -= 1;
                sel[pos] += 1;
                let limit = if pos == dev { outside.len() } else { b.len() };
                if sel[pos] < limit {
                    break;
                }
                sel[pos] = 0;
            }
            if sel.is_empty() {
                break;
            }
        }
    }
    let len = rows.len();
    let columns: Vec<Vec<usize>> = (0..n)
        .map(|c| rows.iter().map(|r| r[c]).collect())
        .collect();
    let generators = Relation::new(len, k, columns)?;
    let goal = |t: &[usize]| t.iter().all(|v| b.contains(v));
    Ok(match closure::sg_closure(alg, &generators, Some(&goal), budget) {
        ClosureOutcome::GoalFound { witness, .. } => SearchOutcome::Found(witness),
        ClosureOutcome::Complete(_) => SearchOutcome::No,
        ClosureOutcome::Exhausted => SearchOutcome::Inconclusive,
    })
}

/// Binary absorption: [`absorbs_with_arity`] at arity 2.
pub fn is_binary_absorbing(
    alg: &Algebra,
    b: &[usize],
    budget: ClosureBudget,
) -> Result<SearchOutcome<TermWitness>> {
    absorbs_with_arity(alg, b, 2, budget)
}

/// Evidence that a subuniverse is central: a ternary absorbing term
/// plus, for every `a ∉ C`, the generated subalgebra of `A²` witnessing
/// `(a,a) ∉ Sg(({a}×C) ∪ (C×{a}))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralWitness {
    pub subset: Vec<usize>,
    pub absorption: TermWitness,
    pub pair_closures: Vec<(usize, Relation)>,
}

/// Central subuniverse test: ternary absorption (Corollary 6.12 makes
/// arity 3 sufficient) plus the pair condition from the definition.
pub fn is_central(
    alg: &Algebra,
    c: &[usize],
    budget: ClosureBudget,
) -> Result<SearchOutcome<CentralWitness>> {
    let absorption = match absorbs_with_arity(alg, c, 3, budget)? {
        SearchOutcome::Found(w) => w,
        SearchOutcome::No => return Ok(SearchOutcome::No),
        SearchOutcome::Inconclusive => return Ok(SearchOutcome::Inconclusive),
    };
    let k = alg.size();
    let mut pair_closures = Vec::new();
    for a in (0..k).filter(|v| !c.contains(v)) {
        let mut pairs: Vec<Vec<usize>> = Vec::new();
        for &x in c {
            pairs.push(vec![a, x]);
            pairs.push(vec![x, a]);
        }
        let generators = Relation::new(2, k, pairs)?;
        let diag = [a, a];
        let goal = |t: &[usize]| t == diag;
        match closure::sg_closure(alg, &generators, Some(&goal), budget) {
            ClosureOutcome::GoalFound { .. } => return Ok(SearchOutcome::No),
            ClosureOutcome::Complete(rel) => pair_closures.push((a, rel)),
            ClosureOutcome::Exhausted => return Ok(SearchOutcome::Inconclusive),
        }
    }
    Ok(SearchOutcome::Found(CentralWitness {
        subset: c.to_vec(),
        absorption,
        pair_closures,
    }))
}

/// Projective subuniverse test (exact): for every basic operation `f`
/// there must be a coordinate `i` with `f(A,…,B at i,…,A) ⊆ B`.
/// Returns the first such coordinate per operation.
pub fn is_projective(alg: &Algebra, b: &[usize]) -> Result<Option<Vec<usize>>> {
    if !is_subuniverse(alg, b) {
        return Err(ModelError::NotSubuniverse(b.to_vec()));
    }
    let k = alg.size();
    let mut coords = Vec::with_capacity(alg.ops.len());
    for op in &alg.ops {
        let m = op.arity;
        let found = (0..m).find(|&i| {
            (0..k.pow(m as u32)).all(|idx| {
                let args = decode_args(idx, m, k);
                !b.contains(&args[i]) || b.contains(&op.eval(&args))
            })
        });
        match found {
            Some(i) => coords.push(i),
            None => return Ok(None),
        }
    }
    Ok(Some(coords))
}

/// A p-affine structure: a bijection `φ: A → Z_p^s` (elements of
/// `Z_p^s` encoded in radix `p`) under which every basic operation is
/// affine, plus the Maltsev term `x ⊖ y ⊕ z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PAffineWitness {
    pub p: usize,
    pub s: usize,
    pub phi: Vec<usize>,
    pub maltsev: Operation,
    pub witness: TermWitness,
}

fn prime_power(k: usize) -> Option<(usize, usize)> {
    for p in 2..=k {
        if (2..p).any(|d| p % d == 0) {
            continue;
        }
        let mut s = 0;
        let mut m = k;
        while m % p == 0 {
            m /= p;
            s += 1;
        }
        if m == 1 {
            return Some((p, s));
        }
    }
    None
}

/// Materializes `R_G = {(a,b,c,d) : φ(a)+φ(b) = φ(c)+φ(d)}` for the
/// componentwise group `Z_p^s` under the encoding `phi`.
fn group_relation(phi: &[usize], p: usize, s: usize) -> Relation {
    let k = phi.len();
    let add = |x: usize, y: usize| {
        let (a, b) = (decode_args(x, s, p), decode_args(y, s, p));
        model::encode_args(
            &a.iter().zip(&b).map(|(u, v)| (u + v) % p).collect::<Vec<_>>(),
            p,
        )
    };
    let tuples = (0..k.pow(4))
        .map(|i| decode_args(i, 4, k))
        .filter(|t| add(phi[t[0]], phi[t[1]]) == add(phi[t[2]], phi[t[3]]))
        .collect();
    Relation::new(4, k, tuples).unwrap()
}

/// Decides whether the algebra is p-affine: `k` must be a prime power,
/// some bijection to `Z_p^s` must make `R_G` invariant under every
/// basic operation, and the algebra must have a Maltsev term (which,
/// for a linear algebra, is necessarily `x ⊖ y ⊕ z`, Lemma 6.19).
///
/// Bijections are searched with `φ(0) = 0` and deduplicated by the
/// materialized `R_G`, which quotients out the symmetries of `Z_p^s`.
pub fn is_p_affine(alg: &Algebra, budget: ClosureBudget) -> SearchOutcome<PAffineWitness> {
    let k = alg.size();
    if k < 2 {
        return SearchOutcome::No;
    }
    let Some((p, s)) = prime_power(k) else {
        return SearchOutcome::No;
    };
    // permutations of 1..k-1 appended to the fixed phi(0) = 0
    let mut linear: Option<(Vec<usize>, Relation)> = None;
    let mut seen: Vec<Relation> = Vec::new();
    let mut rest: Vec<usize> = (1..k).collect();
    'perm: loop {
        let mut phi = vec![0usize];
        phi.extend_from_slice(&rest);
        let rg = group_relation(&phi, p, s);
        if !seen.contains(&rg) {
            seen.push(rg.clone());
            if alg
                .ops
                .iter()
                .all(|op| model::preserves(op, &rg).unwrap().holds())
                && linear.is_none()
            {
                linear = Some((phi, rg));
            }
        }
        // next permutation of `rest` in lexicographic order
        let n = rest.len();
        let mut i = n.saturating_sub(1);
        while i > 0 && rest[i - 1] >= rest[i] {
            i -= 1;
        }
        if i == 0 {
            break 'perm;
        }
        let mut j = n - 1;
        while rest[j] <= rest[i - 1] {
            j -= 1;
        }
        rest.swap(i - 1, j);
        rest[i..].reverse();
    }
    let Some((phi, _)) = linear else {
        return SearchOutcome::No;
    };
    match closure::has_maltsev_term(alg, budget) {
        SearchOutcome::Found(witness) => {
            let maltsev = witness.induced_operation(alg, "m");
            SearchOutcome::Found(PAffineWitness {
                p,
                s,
                phi,
                maltsev,
                witness,
            })
        }
        SearchOutcome::No => SearchOutcome::No,
        SearchOutcome::Inconclusive => SearchOutcome::Inconclusive,
    }
}

/// Whether the algebra is polynomially complete without a binary
/// absorbing, central, or projective subuniverse: simple (no nontrivial
/// congruence), not p-affine, and no nontrivial subuniverse passes any
/// of the three subuniverse detectors. `None` means some inner closure
/// was inconclusive.
pub fn is_pc_without_bacp(alg: &Algebra, budget: ClosureBudget) -> Option<bool> {
    assert!(alg.size() >= 2, "PC analysis needs at least two elements");
    if congruences(alg).iter().any(|c| !c.is_trivial()) {
        return Some(false);
    }
    match is_p_affine(alg, budget) {
        SearchOutcome::Found(_) => return Some(false),
        SearchOutcome::Inconclusive => return None,
        SearchOutcome::No => {}
    }
    let mut inconclusive = false;
    for b in nontrivial_subuniverses(alg) {
        match is_binary_absorbing(alg, &b, budget).unwrap() {
            SearchOutcome::Found(_) => return Some(false),
            SearchOutcome::Inconclusive => inconclusive = true,
            SearchOutcome::No => {}
        }
        match is_central(alg, &b, budget).unwrap() {
            SearchOutcome::Found(_) => return Some(false),
            SearchOutcome::Inconclusive => inconclusive = true,
            SearchOutcome::No => {}
        }
        if is_projective(alg, &b).unwrap().is_some() {
            return Some(false);
        }
    }
    if inconclusive {
        None
    } else {
        Some(true)
    }
}

/// The PC structure of an algebra: the congruences whose quotients are
/// PC without BACP, and the subuniverses they define.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PCStructure {
    pub congruences: Vec<Congruence>,
    pub subuniverses: Vec<Vec<usize>>,
}

/// Collects every congruence whose quotient is PC-without-BACP and
/// returns the subuniverses definable from them: the empty set, `A`,
/// and each preimage of a point-fixing constraint set under the product
/// map into the quotients (Corollary 6.14). `None` means inconclusive.
pub fn pc_structure(alg: &Algebra, budget: ClosureBudget) -> Option<PCStructure> {
    let k = alg.size();
    let mut qualifying = Vec::new();
    for sigma in congruences(alg) {
        if sigma.block_count() < 2 {
            continue;
        }
        let q = quotient(alg, &sigma).expect("enumerated congruence");
        match is_pc_without_bacp(&q, budget) {
            Some(true) => qualifying.push(sigma),
            Some(false) => {}
            None => return None,
        }
    }
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(), (0..k).collect()];
    // preimages of fixing a block in each chosen subset of factors
    let q = qualifying.len();
    for mask in 1usize..1 << q {
        let chosen: Vec<usize> = (0..q).filter(|&i| mask >> i & 1 == 1).collect();
        let mut choice: Vec<usize> = vec![0; chosen.len()];
        loop {
            let set: Vec<usize> = (0..k)
                .filter(|&a| {
                    chosen
                        .iter()
                        .zip(&choice)
                        .all(|(&f, &b)| qualifying[f].block_of[a] == b)
                })
                .collect();
            if !sets.contains(&set) {
                sets.push(set);
            }
            let mut pos = chosen.len();
            loop {
                if pos == 0 {
                    choice.clear();
                    break;
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < qualifying[chosen[pos]].block_count() {
                    break;
                }
                choice[pos] = 0;
            }
            if choice.is_empty() {
                break;
            }
        }
    }
    sets.sort();
    Some(PCStructure {
        congruences: qualifying,
        subuniverses: sets,
    })
}

/// The subuniverses definable from PC quotients (Corollary 6.14);
/// `None` means inconclusive.
pub fn pc_subuniverses(alg: &Algebra, budget: ClosureBudget) -> Option<Vec<Vec<usize>>> {
    pc_structure(alg, budget).map(|s| s.subuniverses)
}

/// One of the five witnesses of Theorem 3.4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StrongSubuniverseWitness {
    BinaryAbsorbing {
        subset: Vec<usize>,
        term: Operation,
        witness: TermWitness,
    },
    Central(CentralWitness),
    PC {
        congruences: Vec<Congruence>,
        block: Vec<usize>,
    },
    PAffineQuotient {
        congruence: Congruence,
        p: usize,
        s: usize,
        phi: Vec<usize>,
        maltsev: Operation,
    },
    Projective {
        subset: Vec<usize>,
        coords: Vec<usize>,
    },
}

/// Outcome of the strong subuniverse driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrongSubuniverseOutcome {
    Witness(StrongSubuniverseWitness),
    /// Only possible when inner closures blew the budget; Theorem 3.4
    /// guarantees a witness otherwise.
    Exhausted,
}

/// Runs the detectors in the order of Theorem 3.4 — nontrivial binary
/// absorbing, central, PC subuniverse, congruence with a p-affine
/// quotient, projective — and returns the first witness. Ties between
/// candidates of one type break by lexicographically least subset.
pub fn find_strong_subuniverse(alg: &Algebra, budget: ClosureBudget) -> StrongSubuniverseOutcome {
    assert!(alg.size() >= 2, "need at least two elements");
    assert!(alg.is_idempotent(), "Theorem 3.4 needs an idempotent algebra");
    let candidates = nontrivial_subuniverses(alg);
    let mut inconclusive = false;
    for b in &candidates {
        match is_binary_absorbing(alg, b, budget).unwrap() {
            SearchOutcome::Found(witness) => {
                let term = witness.induced_operation(alg, "t");
                return StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::BinaryAbsorbing {
                    subset: b.clone(),
                    term,
                    witness,
                });
            }
            SearchOutcome::Inconclusive => inconclusive = true,
            SearchOutcome::No => {}
        }
    }
    for b in &candidates {
        match is_central(alg, b, budget).unwrap() {
            SearchOutcome::Found(w) => {
                return StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::Central(w));
            }
            SearchOutcome::Inconclusive => inconclusive = true,
            SearchOutcome::No => {}
        }
    }
    match pc_structure(alg, budget) {
        Some(pc) => {
            let block = pc
                .subuniverses
                .iter()
                .find(|s| !s.is_empty() && s.len() < alg.size());
            if let Some(block) = block {
                return StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::PC {
                    congruences: pc.congruences,
                    block: block.clone(),
                });
            }
        }
        None => inconclusive = true,
    }
    let mut sigmas = congruences(alg);
    // most refined quotients first, equality leading
    sigmas.sort_by(|a, b| b.block_count().cmp(&a.block_count()).then(a.block_of.cmp(&b.block_of)));
    for sigma in sigmas {
        if sigma.block_count() < 2 {
            continue;
        }
        let q = quotient(alg, &sigma).expect("enumerated congruence");
        match is_p_affine(&q, budget) {
            SearchOutcome::Found(w) => {
                return StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::PAffineQuotient {
                    congruence: sigma,
                    p: w.p,
                    s: w.s,
                    phi: w.phi,
                    maltsev: w.maltsev,
                });
            }
            SearchOutcome::Inconclusive => inconclusive = true,
            SearchOutcome::No => {}
        }
    }
    for b in &candidates {
        if let Some(coords) = is_projective(alg, b).unwrap() {
            return StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::Projective {
                subset: b.clone(),
                coords,
            });
        }
    }
    debug_assert!(inconclusive, "Theorem 3.4 guarantees a witness when budgets suffice");
    StrongSubuniverseOutcome::Exhausted
}

fn depends_on(op: &Operation) -> Vec<usize> {
    let k = op.domain_size;
    let m = op.arity;
    (0..m)
        .filter(|&i| {
            (0..k.pow(m as u32)).any(|idx| {
                let args = decode_args(idx, m, k);
                (0..k).any(|v| {
                    let mut other = args.clone();
                    other[i] = v;
                    op.eval(&args) != op.eval(&other)
                })
            })
        })
        .collect()
}

/// Searches `HS(A)` for an essentially unary algebra of size ≥ 2:
/// scans every subuniverse `S` and every congruence `σ` of the induced
/// algebra, returning the first `(S, σ)` whose quotient has every
/// operation depending on at most one argument. The congruence is over
/// the renumbered subalgebra domain `0..|S|-1`.
pub fn essentially_unary_in_hs(alg: &Algebra) -> Option<(Vec<usize>, Congruence)> {
    for s in subuniverses(alg) {
        if s.len() < 2 {
            continue;
        }
        let sub = subalgebra(alg, &s).expect("enumerated subuniverse");
        for sigma in congruences(&sub) {
            if sigma.block_count() < 2 {
                continue;
            }
            let q = quotient(&sub, &sigma).expect("enumerated congruence");
            if q.ops.iter().all(|op| depends_on(op).len() <= 1) {
                return Some((s, sigma));
            }
        }
    }
    None
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{bool_majority, bool_min, bool_xor3};

    pub(crate) fn alg(ops: Vec<Operation>) -> Algebra {
        let k = ops[0].domain_size;
        Algebra::new(Domain::new(k), ops).unwrap()
    }

    /// Rock-paper-scissors: the commutative "winner" operation on
    /// {0: rock, 1: paper, 2: scissors}.
    pub(crate) fn rps() -> Algebra {
        let beats = |a: usize, b: usize| (a + 2) % 3 == b;
        alg(vec![Operation::from_fn("s", 2, 3, move |t| {
            if beats(t[1], t[0]) {
                t[1]
            } else {
                t[0]
            }
        })])
    }

    /// Componentwise xor over Z2², elements encoded as two bits.
    pub(crate) fn z2z2_xor() -> Algebra {
        alg(vec![Operation::from_fn("xor3", 3, 4, |t| t[0] ^ t[1] ^ t[2])])
    }

    /// The ternary discriminator on {0,1,2}.
    pub(crate) fn discriminator() -> Algebra {
        alg(vec![Operation::from_fn("d", 3, 3, |t| {
            if t[0] == t[1] {
                t[2]
            } else {
                t[0]
            }
        })])
    }

    fn budget() -> ClosureBudget {
        ClosureBudget::default()
    }

    #[test]
    fn congruence_examples() {
        let min = alg(vec![bool_min()]);
        let cs = congruences(&min);
        assert_eq!(cs.len(), 2);

        let cs = congruences(&z2z2_xor());
        assert_eq!(cs.len(), 5);
        let nontrivial: Vec<_> = cs.iter().filter(|c| !c.is_trivial()).collect();
        assert_eq!(nontrivial.len(), 3);
        assert!(nontrivial.iter().all(|c| c.block_count() == 2));

        assert_eq!(congruences(&rps()).len(), 2);
    }

    #[test]
    fn quotient_examples() {
        let a = z2z2_xor();
        let sigma = Congruence::from_block_of(&[0, 0, 1, 1]);
        assert!(sigma.is_congruence_of(&a));
        let q = quotient(&a, &sigma).unwrap();
        assert_eq!(q.ops[0].table, bool_xor3().table);

        let copy = quotient(&a, &Congruence::equality(4)).unwrap();
        assert_eq!(copy.ops[0].table, a.ops[0].table);
        let one = quotient(&a, &Congruence::full(4)).unwrap();
        assert_eq!(one.size(), 1);

        // not a congruence: {0,1} vs {2},{3} is fine, but {0,2} vs rest is not
        let bad = Congruence::from_block_of(&[0, 1, 0, 1]);
        assert!(bad.is_congruence_of(&a)); // cosets of {0,2} are preserved
        let really_bad = Congruence::from_block_of(&[0, 0, 0, 1]);
        assert!(quotient(&a, &really_bad).is_err());
    }

    #[test]
    fn quotient_congruence_round_trip() {
        for a in [z2z2_xor(), rps(), discriminator()] {
            for sigma in congruences(&a) {
                let q = quotient(&a, &sigma).unwrap();
                // kernel of the block map is the congruence itself
                let kernel = Congruence::from_block_of(&sigma.block_of);
                assert_eq!(kernel, sigma);
                assert_eq!(q.size(), sigma.block_count());
            }
        }
    }

    #[test]
    fn absorption_examples() {
        let min = alg(vec![bool_min()]);
        match absorbs_with_arity(&min, &[0], 2, budget()).unwrap() {
            SearchOutcome::Found(w) => {
                assert_eq!(w.induced_operation(&min, "t").table, bool_min().table);
            }
            other => panic!("expected witness, got {other:?}"),
        }

        let xor = alg(vec![bool_xor3()]);
        assert!(absorbs_with_arity(&xor, &[0], 2, budget()).unwrap().is_no());

        let maj = alg(vec![bool_majority()]);
        match absorbs_with_arity(&maj, &[0], 3, budget()).unwrap() {
            SearchOutcome::Found(w) => {
                assert_eq!(w.induced_operation(&maj, "t").table, bool_majority().table);
            }
            other => panic!("expected witness, got {other:?}"),
        }
        assert!(is_binary_absorbing(&maj, &[0], budget()).unwrap().is_no());

        // {0,1,2} is not closed under Z2²-xor (1 ^ 2 ^ 0 = 3)
        assert!(matches!(
            absorbs_with_arity(&z2z2_xor(), &[0, 1, 2], 2, budget()),
            Err(ModelError::NotSubuniverse(_))
        ));
    }

    #[test]
    fn central_examples() {
        let maj = alg(vec![bool_majority()]);
        match is_central(&maj, &[0], budget()).unwrap() {
            SearchOutcome::Found(w) => {
                let (a, rel) = &w.pair_closures[0];
                assert_eq!(*a, 1);
                assert_eq!(rel, &Relation::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap());
            }
            other => panic!("expected central, got {other:?}"),
        }

        let min = alg(vec![bool_min()]);
        match is_central(&min, &[0], budget()).unwrap() {
            SearchOutcome::Found(w) => {
                let (_, rel) = &w.pair_closures[0];
                assert_eq!(
                    rel,
                    &Relation::new(2, 2, vec![vec![0, 0], vec![0, 1], vec![1, 0]]).unwrap()
                );
            }
            other => panic!("expected central, got {other:?}"),
        }

        let xor = alg(vec![bool_xor3()]);
        assert!(is_central(&xor, &[0], budget()).unwrap().is_no());
    }

    #[test]
    fn projective_examples() {
        let min = alg(vec![bool_min()]);
        assert_eq!(is_projective(&min, &[0]).unwrap(), Some(vec![0]));

        let maj = alg(vec![bool_majority()]);
        assert_eq!(is_projective(&maj, &[0]).unwrap(), None);

        // Lemma 3.2 cross-check: A³ ∖ {(1,1,1)} is invariant for (min, {0})
        let inv = Relation::new(
            3,
            2,
            (0..8)
                .map(|i| decode_args(i, 3, 2))
                .filter(|t| t != &vec![1, 1, 1])
                .collect(),
        )
        .unwrap();
        assert!(model::preserves(&bool_min(), &inv).unwrap().holds());
    }

    #[test]
    fn p_affine_examples() {
        let xor = alg(vec![bool_xor3()]);
        match is_p_affine(&xor, budget()) {
            SearchOutcome::Found(w) => {
                assert_eq!((w.p, w.s), (2, 1));
                assert_eq!(w.phi, vec![0, 1]);
                assert_eq!(w.maltsev.table, bool_xor3().table);
            }
            other => panic!("expected 2-affine, got {other:?}"),
        }

        let min = alg(vec![bool_min()]);
        assert!(is_p_affine(&min, budget()).is_no());

        match is_p_affine(&z2z2_xor(), budget()) {
            SearchOutcome::Found(w) => assert_eq!((w.p, w.s), (2, 2)),
            other => panic!("expected (2,2)-affine, got {other:?}"),
        }

        let aff3 = alg(vec![Operation::from_fn("m", 3, 3, |t| (t[0] + 2 * t[1] + t[2]) % 3)]);
        match is_p_affine(&aff3, budget()) {
            SearchOutcome::Found(w) => assert_eq!((w.p, w.s), (3, 1)),
            other => panic!("expected 3-affine, got {other:?}"),
        }
    }

    #[test]
    fn pc_examples() {
        assert_eq!(is_pc_without_bacp(&rps(), budget()), Some(true));
        assert_eq!(is_pc_without_bacp(&alg(vec![bool_min()]), budget()), Some(false));
        assert_eq!(is_pc_without_bacp(&discriminator(), budget()), Some(false));

        assert_eq!(
            pc_subuniverses(&rps(), budget()).unwrap(),
            vec![vec![], vec![0], vec![0, 1, 2], vec![1], vec![2]]
        );
        assert_eq!(
            pc_subuniverses(&alg(vec![bool_min()]), budget()).unwrap(),
            vec![vec![], vec![0, 1]]
        );
        assert_eq!(
            pc_subuniverses(&alg(vec![bool_xor3()]), budget()).unwrap(),
            vec![vec![], vec![0, 1]]
        );
    }

    #[test]
    fn strong_subuniverse_examples() {
        let min = alg(vec![bool_min()]);
        match find_strong_subuniverse(&min, budget()) {
            StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::BinaryAbsorbing {
                subset,
                term,
                ..
            }) => {
                assert_eq!(subset, vec![0]);
                assert_eq!(term.table, bool_min().table);
            }
            other => panic!("expected BA({{0}}), got {other:?}"),
        }

        let xor = alg(vec![bool_xor3()]);
        match find_strong_subuniverse(&xor, budget()) {
            StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::PAffineQuotient {
                congruence,
                p,
                s,
                ..
            }) => {
                assert!(congruence.is_equality());
                assert_eq!((p, s), (2, 1));
            }
            other => panic!("expected p-affine quotient, got {other:?}"),
        }

        match find_strong_subuniverse(&rps(), budget()) {
            StrongSubuniverseOutcome::Witness(StrongSubuniverseWitness::PC { block, .. }) => {
                assert_eq!(block, vec![0]);
            }
            other => panic!("expected PC witness, got {other:?}"),
        }
    }

    #[test]
    fn essentially_unary_examples() {
        let proj = alg(vec![Operation::projection(2, 0, 2)]);
        match essentially_unary_in_hs(&proj) {
            Some((s, sigma)) => {
                assert_eq!(s, vec![0, 1]);
                assert!(sigma.is_equality());
            }
            None => panic!("projection algebra is essentially unary"),
        }

        assert_eq!(essentially_unary_in_hs(&alg(vec![bool_majority()])), None);
        assert_eq!(essentially_unary_in_hs(&alg(vec![bool_min()])), None);
    }
}
