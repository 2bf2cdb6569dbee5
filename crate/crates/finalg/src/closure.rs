//! Subalgebra generation (`Sg`), pp-formula evaluation, and
//! identity-constrained polymorphism search.
//!
//! The worklist closure keeps a derivation for every generated tuple,
//! so a successful goal search yields a replayable term witness. All
//! potentially unbounded searches run under a [`ClosureBudget`] and
//! report `Inconclusive` rather than a wrong answer when it runs out.

use crate::model::{
    self, decode_args, encode_args, Algebra, Atom, ConstraintLanguage, ModelError, Operation,
    PPFormula, Relation,
};
use serde::Serialize;
use std::collections::{HashMap, HashSet};

/// Cap on the number of tuples a single closure may accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosureBudget {
    pub max_tuples: usize,
}

impl Default for ClosureBudget {
    fn default() -> Self {
        ClosureBudget { max_tuples: 1_000_000 }
    }
}

/// One application of a basic operation inside a derivation trace.
/// Argument indices below the generator count refer to generators;
/// higher indices refer to earlier steps (offset by the generator count).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub op: usize,
    pub args: Vec<usize>,
}

/// A term witnessing a goal tuple in a closure: a derivation trace over
/// the generators, replayable to reproduce the goal and to compute the
/// induced term operation. `root` names the node denoting the goal:
/// indices below `generator_count` are generators (the goal was already
/// a generator, and the term is a projection), higher indices refer to
/// trace steps offset by `generator_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermWitness {
    pub generator_count: usize,
    pub trace: Vec<TraceStep>,
    pub root: usize,
}

impl TermWitness {
    /// Replays the trace on the given generator tuples and returns the
    /// tuple at the root node.
    pub fn replay(&self, alg: &Algebra, generators: &[Vec<usize>]) -> Vec<usize> {
        assert_eq!(generators.len(), self.generator_count);
        let mut nodes: Vec<Vec<usize>> = generators.to_vec();
        for step in &self.trace {
            let rows: Vec<&[usize]> = step.args.iter().map(|&i| nodes[i].as_slice()).collect();
            let image = model::apply_op(&alg.ops[step.op], &rows).expect("trace replay failed");
            nodes.push(image);
        }
        nodes[self.root].clone()
    }

    /// The term operation this derivation denotes, as an explicit table
    /// of arity `generator_count` over the algebra's domain.
    ///
    /// Computed by replaying the trace on the coordinate projections of
    /// `A^g`, so the table is exact whatever the trace looks like.
    pub fn induced_operation(&self, alg: &Algebra, name: &str) -> Operation {
        let k = alg.size();
        let g = self.generator_count;
        let positions = k.pow(g as u32);
        let projections: Vec<Vec<usize>> = (0..g)
            .map(|i| (0..positions).map(|idx| decode_args(idx, g, k)[i]).collect())
            .collect();
        let table = self.replay(alg, &projections);
        Operation::new(name, g, k, table).expect("induced operation table invalid")
    }

    /// Serializes the derivation as a JSON value.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("witness serialization")
    }
}

/// Result of a goal-directed closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureOutcome {
    /// Fixpoint reached without meeting the goal; the full closure.
    Complete(Relation),
    /// A tuple satisfying the goal was generated.
    GoalFound { tuple: Vec<usize>, witness: TermWitness },
    /// Budget exceeded before a fixpoint or goal.
    Exhausted,
}

impl ClosureOutcome {
    pub fn relation(&self) -> Option<&Relation> {
        match self {
            ClosureOutcome::Complete(r) => Some(r),
            _ => None,
        }
    }
}

/// Computes the least superset of `generators` closed under
/// coordinatewise application of all basic operations of `alg`, by a
/// worklist fixpoint with deterministic ordering.
///
/// If `goal` is given, stops at the first generated tuple satisfying it
/// and returns the witnessing derivation (generators themselves are
/// checked first).
pub fn sg_closure(
    alg: &Algebra,
    generators: &Relation,
    goal: Option<&dyn Fn(&[usize]) -> bool>,
    budget: ClosureBudget,
) -> ClosureOutcome {
    assert_eq!(
        alg.size(),
        generators.domain_size,
        "algebra and generators must share the domain"
    );
    let gen_count = generators.len();
    let mut nodes: Vec<Vec<usize>> = generators.tuples().to_vec();
    let mut parents: Vec<Option<TraceStep>> = vec![None; gen_count];
    let mut seen: HashSet<Vec<usize>> = nodes.iter().cloned().collect();

    if let Some(goal) = goal {
        for (i, t) in nodes.iter().enumerate() {
            if goal(t) {
                return ClosureOutcome::GoalFound {
                    tuple: t.clone(),
                    witness: TermWitness {
                        generator_count: gen_count,
                        trace: Vec::new(),
                        root: i,
                    },
                };
            }
        }
    }
    if gen_count == 0 {
        return ClosureOutcome::Complete(Relation::empty(generators.arity, alg.size()));
    }

    // Processing node i, we combine it with all nodes of index <= i so
    // every argument selection is enumerated exactly once.
    let mut frontier = 0usize;
    while frontier < nodes.len() {
        for (op_idx, op) in alg.ops.iter().enumerate() {
            let m = op.arity;
            // all m-tuples over 0..=frontier containing `frontier`
            let mut args = vec![0usize; m];
            loop {
                if args.contains(&frontier) {
                    let rows: Vec<&[usize]> = args.iter().map(|&i| nodes[i].as_slice()).collect();
                    let image = model::apply_op(op, &rows).expect("closure application failed");
                    if !seen.contains(&image) {
                        if nodes.len() >= budget.max_tuples {
                            return ClosureOutcome::Exhausted;
                        }
                        seen.insert(image.clone());
                        nodes.push(image.clone());
                        parents.push(Some(TraceStep {
                            op: op_idx,
                            args: args.clone(),
                        }));
                        if let Some(goal) = goal {
                            if goal(&image) {
                                let witness = extract_witness(gen_count, &parents, nodes.len() - 1);
                                return ClosureOutcome::GoalFound { tuple: image, witness };
                            }
                        }
                    }
                }
                // odometer over 0..=frontier
                let mut pos = m;
                loop {
                    if pos == 0 {
                        args.clear();
                        break;
                    }
                    pos -= 1;
                    args[pos] += 1;
                    if args[pos] <= frontier {
                        break;
                    }
                    args[pos] = 0;
                }
                if args.is_empty() {
                    break;
                }
            }
        }
        frontier += 1;
    }
    let rel = Relation::new(generators.arity, alg.size(), nodes).expect("closure relation invalid");
    ClosureOutcome::Complete(rel)
}

fn extract_witness(gen_count: usize, parents: &[Option<TraceStep>], node: usize) -> TermWitness {
    // collect the sub-DAG feeding `node`, in topological (index) order
    let mut needed: Vec<usize> = Vec::new();
    let mut stack = vec![node];
    let mut marked = vec![false; parents.len()];
    while let Some(i) = stack.pop() {
        if marked[i] || i < gen_count {
            continue;
        }
        marked[i] = true;
        needed.push(i);
        for &a in &parents[i].as_ref().expect("non-generator without parent").args {
            stack.push(a);
        }
    }
    needed.sort_unstable();
    let mut renumber: HashMap<usize, usize> = HashMap::new();
    let mut trace = Vec::with_capacity(needed.len());
    for (new_idx, &old_idx) in needed.iter().enumerate() {
        let step = parents[old_idx].as_ref().unwrap();
        let args = step
            .args
            .iter()
            .map(|&a| if a < gen_count { a } else { gen_count + renumber[&a] })
            .collect();
        renumber.insert(old_idx, new_idx);
        trace.push(TraceStep { op: step.op, args });
    }
    let root = gen_count + trace.len() - 1;
    TermWitness {
        generator_count: gen_count,
        trace,
        root,
    }
}

/// Evaluation limit for pp-formulas: `k^(free + existential)` positions.
pub const PP_EVAL_LIMIT: u64 = 1 << 24;

/// Evaluates a pp-formula over a language by exhaustive enumeration
/// with backtracking over all variables. Equality atoms are built in.
pub fn eval_pp_formula(lang: &ConstraintLanguage, formula: &PPFormula) -> model::Result<Relation> {
    formula.validate(lang)?;
    let k = lang.domain.size;
    let total = formula.var_count();
    let space = (k as u64).checked_pow(total as u32).unwrap_or(u64::MAX);
    if space > PP_EVAL_LIMIT {
        return Err(ModelError::TooLarge {
            size: space,
            limit: PP_EVAL_LIMIT,
        });
    }
    // atoms indexed by the largest variable they mention, so each is
    // checked as soon as its variables are assigned
    let mut atoms_by_last: Vec<Vec<&Atom>> = vec![Vec::new(); total.max(1)];
    for atom in &formula.atoms {
        let last = match atom {
            Atom::Eq(a, b) => *a.max(b),
            Atom::Rel { vars, .. } => vars.iter().copied().max().unwrap_or(0),
        };
        atoms_by_last[last].push(atom);
    }
    let mut assignment = vec![0usize; total];
    let mut result: Vec<Vec<usize>> = Vec::new();
    fn atom_holds(lang: &ConstraintLanguage, atom: &Atom, assignment: &[usize]) -> bool {
        match atom {
            Atom::Eq(a, b) => assignment[*a] == assignment[*b],
            Atom::Rel { name, vars } => {
                let rel = lang.relations.get(name).expect("validated");
                let tuple: Vec<usize> = vars.iter().map(|&v| assignment[v]).collect();
                rel.contains(&tuple)
            }
        }
    }
    fn descend(
        lang: &ConstraintLanguage,
        atoms_by_last: &[Vec<&Atom>],
        k: usize,
        total: usize,
        free: usize,
        depth: usize,
        assignment: &mut Vec<usize>,
        result: &mut Vec<Vec<usize>>,
    ) {
        if depth == total {
            result.push(assignment[..free].to_vec());
            return;
        }
        for v in 0..k {
            assignment[depth] = v;
            if atoms_by_last[depth]
                .iter()
                .all(|atom| atom_holds(lang, atom, assignment))
            {
                descend(lang, atoms_by_last, k, total, free, depth + 1, assignment, result);
            }
        }
    }
    if total == 0 {
        // atoms always mention variables, so a variable-free formula is
        // the empty conjunction: the full nullary relation
        return Relation::new(0, k, vec![vec![]]);
    }
    descend(
        lang,
        &atoms_by_last,
        k,
        total,
        formula.free_count,
        0,
        &mut assignment,
        &mut result,
    );
    Relation::new(formula.free_count, k, result)
}

/// A unary polymorphism together with its range and bijectivity tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnaryPolymorphism {
    pub op: Operation,
    pub range: Vec<usize>,
    pub bijective: bool,
}

/// Enumerates all unary maps preserving every relation of the language.
pub fn find_unary_polymorphisms(lang: &ConstraintLanguage) -> Vec<UnaryPolymorphism> {
    let k = lang.domain.size;
    let mut out = Vec::new();
    for code in 0..k.pow(k as u32) {
        let table = decode_args(code, k, k);
        let op = Operation::new("f", 1, k, table.clone()).unwrap();
        let ok = lang
            .relations
            .values()
            .all(|r| model::preserves(&op, r).map(|p| p.holds()).unwrap_or(false));
        if ok {
            let mut range: Vec<usize> = table.clone();
            range.sort_unstable();
            range.dedup();
            let bijective = range.len() == k;
            out.push(UnaryPolymorphism { op, range, bijective });
        }
    }
    out
}

/// Identity constraints for [`find_polymorphism`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PolymorphismSpec {
    pub idempotent: bool,
    pub wnu: bool,
    pub maltsev: bool,
    pub cyclic: bool,
}

/// Result of a bounded search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    No,
    Inconclusive,
}

impl<T> SearchOutcome<T> {
    pub fn is_no(&self) -> bool {
        matches!(self, SearchOutcome::No)
    }
    pub fn found(&self) -> Option<&T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Size limit on the operation table searched by [`find_polymorphism`].
pub const POLY_TABLE_LIMIT: u64 = 1 << 20;
const POLY_CONSTRAINT_LIMIT: u64 = 1 << 23;

/// Searches for an operation of the given arity preserving every
/// relation of the language and satisfying the identity constraints.
///
/// The search backtracks over table cells grouped into symmetry classes
/// (WNU and cyclic identities make whole orbits share a value), with
/// forward checking against the indicator constraints. `No` is exact:
/// the whole (quotiented) space was searched.
pub fn find_polymorphism(
    lang: &ConstraintLanguage,
    arity: usize,
    spec: PolymorphismSpec,
) -> SearchOutcome<Operation> {
    match enumerate_polymorphisms(lang, arity, spec, Some(1)) {
        SearchOutcome::Found(mut v) => match v.pop() {
            Some(op) => SearchOutcome::Found(op),
            None => SearchOutcome::No,
        },
        SearchOutcome::No => SearchOutcome::No,
        SearchOutcome::Inconclusive => SearchOutcome::Inconclusive,
    }
}

/// Enumerates all polymorphisms of the given arity satisfying the
/// identity constraints (up to `limit` of them, if given). The full
/// enumeration backs the exhaustive-search tests.
pub fn enumerate_polymorphisms(
    lang: &ConstraintLanguage,
    arity: usize,
    spec: PolymorphismSpec,
    limit: Option<usize>,
) -> SearchOutcome<Vec<Operation>> {
    let k = lang.domain.size;
    let cells = match (k as u64).checked_pow(arity as u32) {
        Some(c) if c <= POLY_TABLE_LIMIT => c as usize,
        _ => return SearchOutcome::Inconclusive,
    };

    // symmetry classes via union-find over cells
    let mut uf: Vec<usize> = (0..cells).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    fn union(uf: &mut Vec<usize>, a: usize, b: usize) {
        let (ra, rb) = (find(uf, a), find(uf, b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            uf[hi] = lo;
        }
    }
    for idx in 0..cells {
        let args = decode_args(idx, arity, k);
        if spec.wnu {
            // identify all one-deviation permutations of the same multiset
            if let Some((x, y)) = one_deviation(&args) {
                let mut canonical = vec![x; arity];
                canonical[arity - 1] = y;
                union(&mut uf, idx, encode_args(&canonical, k));
            }
        }
        if spec.cyclic {
            let mut rot = args.clone();
            rot.rotate_left(1);
            union(&mut uf, idx, encode_args(&rot, k));
        }
    }
    let mut class_of = vec![0usize; cells];
    let mut class_reps: Vec<usize> = Vec::new();
    {
        let mut class_index: HashMap<usize, usize> = HashMap::new();
        for idx in 0..cells {
            let root = find(&mut uf, idx);
            let next = class_reps.len();
            let entry = *class_index.entry(root).or_insert_with(|| {
                class_reps.push(root);
                next
            });
            class_of[idx] = entry;
        }
    }
    let class_count = class_reps.len();

    // fixed values from identities
    let mut fixed: Vec<Option<usize>> = vec![None; class_count];
    let fix = |fixed: &mut Vec<Option<usize>>, cell: usize, value: usize| -> bool {
        let c = class_of[cell];
        match fixed[c] {
            None => {
                fixed[c] = Some(value);
                true
            }
            Some(v) => v == value,
        }
    };
    if spec.idempotent {
        for a in 0..k {
            if !fix(&mut fixed, encode_args(&vec![a; arity], k), a) {
                return SearchOutcome::No;
            }
        }
    }
    if spec.maltsev {
        if arity != 3 {
            return SearchOutcome::No;
        }
        for x in 0..k {
            for y in 0..k {
                if !fix(&mut fixed, encode_args(&[x, x, y], k), y)
                    || !fix(&mut fixed, encode_args(&[y, x, x], k), y)
                {
                    return SearchOutcome::No;
                }
            }
        }
    }

    // indicator constraints: one per selection of `arity` tuples from a
    // relation, over the classes of the induced cells
    struct IndicatorConstraint {
        rel: Relation,
        scope: Vec<usize>,
    }
    let mut constraints: Vec<IndicatorConstraint> = Vec::new();
    let mut seen_scopes: HashSet<(usize, Vec<usize>)> = HashSet::new();
    for (rel_idx, rel) in lang.relations.values().enumerate() {
        if rel.is_empty() {
            continue;
        }
        let selections = (rel.len() as u64).checked_pow(arity as u32);
        match selections {
            Some(s) if s <= POLY_CONSTRAINT_LIMIT => {}
            _ => return SearchOutcome::Inconclusive,
        }
        let mut sel = vec![0usize; arity];
        loop {
            let scope: Vec<usize> = (0..rel.arity)
                .map(|j| {
                    let args: Vec<usize> = sel.iter().map(|&i| rel.tuples()[i][j]).collect();
                    class_of[encode_args(&args, k)]
                })
                .collect();
            if seen_scopes.insert((rel_idx, scope.clone())) {
                constraints.push(IndicatorConstraint {
                    rel: rel.clone(),
                    scope,
                });
            }
            let mut pos = arity;
            loop {
                if pos == 0 {
                    sel.clear();
                    break;
                }
                pos -= 1;
                sel[pos] += 1;
                if sel[pos] < rel.len() {
                    break;
                }
                sel[pos] = 0;
            }
            if sel.is_empty() {
                break;
            }
        }
    }
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (ci, c) in constraints.iter().enumerate() {
        for &v in &c.scope {
            by_var[v].push(ci);
        }
    }
    for list in &mut by_var {
        list.sort_unstable();
        list.dedup();
    }

    // backtracking with forward checking over class domains
    let full_mask: u32 = (1u32 << k) - 1;
    let mut domains: Vec<u32> = fixed
        .iter()
        .map(|f| match f {
            Some(v) => 1u32 << v,
            None => full_mask,
        })
        .collect();
    let mut assignment: Vec<Option<usize>> = vec![None; class_count];
    let mut solutions: Vec<Operation> = Vec::new();

    struct Ctx<'a> {
        constraints: &'a [IndicatorConstraint],
        by_var: &'a [Vec<usize>],
        k: usize,
        arity: usize,
        cells: usize,
        class_of: &'a [usize],
        limit: Option<usize>,
    }

    fn propagate(
        ctx: &Ctx,
        var: usize,
        domains: &mut [u32],
        assignment: &[Option<usize>],
        touched: &mut Vec<(usize, u32)>,
    ) -> bool {
        for &ci in &ctx.by_var[var] {
            let c = &ctx.constraints[ci];
            let unassigned: Vec<usize> = c
                .scope
                .iter()
                .copied()
                .filter(|&v| assignment[v].is_none())
                .collect();
            if unassigned.len() > 1 {
                continue;
            }
            if unassigned.is_empty() {
                let tuple: Vec<usize> = c.scope.iter().map(|&v| assignment[v].unwrap()).collect();
                if !c.rel.contains(&tuple) {
                    return false;
                }
            } else {
                let free = unassigned[0];
                let mut allowed = 0u32;
                'tuples: for t in c.rel.tuples() {
                    let mut candidate = None;
                    for (pos, &v) in c.scope.iter().enumerate() {
                        match assignment[v] {
                            Some(val) => {
                                if t[pos] != val {
                                    continue 'tuples;
                                }
                            }
                            None => match candidate {
                                None => candidate = Some(t[pos]),
                                Some(cv) => {
                                    if cv != t[pos] {
                                        continue 'tuples;
                                    }
                                }
                            },
                        }
                    }
                    if let Some(cv) = candidate {
                        allowed |= 1u32 << cv;
                    }
                }
                let new_dom = domains[free] & allowed;
                if new_dom != domains[free] {
                    touched.push((free, domains[free]));
                    domains[free] = new_dom;
                    if new_dom == 0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn descend(
        ctx: &Ctx,
        var: usize,
        domains: &mut Vec<u32>,
        assignment: &mut Vec<Option<usize>>,
        solutions: &mut Vec<Operation>,
    ) -> bool {
        if var == assignment.len() {
            let mut table = vec![0usize; ctx.cells];
            for (cell, slot) in table.iter_mut().enumerate() {
                *slot = assignment[ctx.class_of[cell]].unwrap();
            }
            solutions.push(Operation::new("w", ctx.arity, ctx.k, table).unwrap());
            return ctx.limit.map_or(true, |l| solutions.len() < l);
        }
        for v in 0..ctx.k {
            if domains[var] & (1u32 << v) == 0 {
                continue;
            }
            assignment[var] = Some(v);
            let mut touched: Vec<(usize, u32)> = Vec::new();
            let ok = propagate(ctx, var, domains, assignment, &mut touched);
            let keep_going = if ok {
                descend(ctx, var + 1, domains, assignment, solutions)
            } else {
                true
            };
            for (idx, dom) in touched.into_iter().rev() {
                domains[idx] = dom;
            }
            assignment[var] = None;
            if !keep_going {
                return false;
            }
        }
        true
    }

    let ctx = Ctx {
        constraints: &constraints,
        by_var: &by_var,
        k,
        arity,
        cells,
        class_of: &class_of,
        limit,
    };
    descend(&ctx, 0, &mut domains, &mut assignment, &mut solutions);
    if solutions.is_empty() {
        SearchOutcome::No
    } else {
        SearchOutcome::Found(solutions)
    }
}

/// Detects tuples of the form `(x,...,x,y,x,...,x)` with `x != y`,
/// returning `(x, y)`.
fn one_deviation(args: &[usize]) -> Option<(usize, usize)> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &a in args {
        *counts.entry(a).or_insert(0) += 1;
    }
    if counts.len() != 2 {
        return None;
    }
    let mut iter = counts.into_iter();
    let (v1, c1) = iter.next().unwrap();
    let (v2, c2) = iter.next().unwrap();
    if c1 == 1 {
        Some((v2, v1))
    } else if c2 == 1 {
        Some((v1, v2))
    } else {
        None
    }
}

/// Searches for a Maltsev term of the algebra via the indicator
/// closure: generate from the three all-pairs columns and look for the
/// diagonal pair column.
pub fn has_maltsev_term(alg: &Algebra, budget: ClosureBudget) -> SearchOutcome<TermWitness> {
    let k = alg.size();
    // all pairs (a, b), row-major; alpha = first components, beta = second
    let mut alpha = Vec::with_capacity(k * k);
    let mut beta = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            alpha.push(a);
            beta.push(b);
        }
    }
    let concat = |x: &[usize], y: &[usize]| {
        let mut t = x.to_vec();
        t.extend_from_slice(y);
        t
    };
    let generators = Relation::new(
        2 * k * k,
        k,
        vec![
            concat(&alpha, &beta),
            concat(&beta, &beta),
            concat(&beta, &alpha),
        ],
    )
    .unwrap();
    let target = concat(&alpha, &alpha);
    let goal = move |t: &[usize]| t == target.as_slice();
    match sg_closure(alg, &generators, Some(&goal), budget) {
        ClosureOutcome::GoalFound { witness, .. } => SearchOutcome::Found(witness),
        ClosureOutcome::Complete(_) => SearchOutcome::No,
        ClosureOutcome::Exhausted => SearchOutcome::Inconclusive,
    }
}
