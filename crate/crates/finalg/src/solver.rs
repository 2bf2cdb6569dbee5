//! CSP instances, the `CheckCC`/`Solve` cycle-consistency algorithms,
//! bounded consistency predicates, and a brute-force oracle.
//!
//! `Solve` is sound for `NoSolution` and returns `Ok` together with a
//! nonempty cycle-consistent reduction otherwise; `Ok` does *not* imply
//! satisfiability in general (the linear counterexample instance of the
//! `transform` module is unsatisfiable yet cycle-consistent), which is
//! exactly the phenomenon this toolkit exists to explore.

use crate::model::{self, ConstraintLanguage, ModelError, Relation, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// A constraint: a materialized relation applied to a variable scope.
/// Repeated variables in the scope are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub relation: Relation,
    pub scope: Vec<usize>,
}

/// A CSP instance with named variables and per-variable domains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CSPInstance {
    pub domain_size: usize,
    pub variables: Vec<String>,
    /// Sorted domain subset of each variable.
    pub domains: Vec<Vec<usize>>,
    pub constraints: Vec<Constraint>,
}

impl CSPInstance {
    pub fn new(domain_size: usize) -> Self {
        CSPInstance {
            domain_size,
            variables: Vec::new(),
            domains: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Declares a variable; `domain = None` means the full domain.
    pub fn add_variable(&mut self, name: impl Into<String>, domain: Option<Vec<usize>>) -> Result<usize> {
        let name = name.into();
        if self.variables.contains(&name) {
            return Err(ModelError::Parse {
                line: 0,
                message: format!("duplicate variable {name:?}"),
            });
        }
        let mut domain = domain.unwrap_or_else(|| (0..self.domain_size).collect());
        domain.sort_unstable();
        domain.dedup();
        if let Some(&bad) = domain.iter().find(|&&v| v >= self.domain_size) {
            return Err(ModelError::OutOfRange {
                element: bad,
                size: self.domain_size,
            });
        }
        self.variables.push(name);
        self.domains.push(domain);
        Ok(self.variables.len() - 1)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        relation: Relation,
        scope: Vec<usize>,
    ) -> Result<()> {
        if relation.domain_size != self.domain_size {
            return Err(ModelError::DomainMismatch {
                left: self.domain_size,
                right: relation.domain_size,
            });
        }
        if scope.len() != relation.arity {
            return Err(ModelError::ArityMismatch {
                expected: relation.arity,
                got: scope.len(),
            });
        }
        if let Some(&bad) = scope.iter().find(|&&v| v >= self.variables.len()) {
            return Err(ModelError::BadCoordinate {
                index: bad,
                arity: self.variables.len(),
            });
        }
        self.constraints.push(Constraint {
            name: name.into(),
            relation,
            scope,
        });
        Ok(())
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    /// Renders the instance in the file format of [`parse_instance`]
    /// with an inline language block, so the text round-trips. The
    /// built-in `=` relation is not declared; a constraint name used
    /// with two different relations gets a numeric suffix.
    pub fn format_instance(&self) -> String {
        use std::fmt::Write;
        let mut rel_names: Vec<String> = Vec::with_capacity(self.constraints.len());
        let mut declared: Vec<(String, &Relation)> = Vec::new();
        for c in &self.constraints {
            if c.name == "=" && c.relation == Relation::equality(self.domain_size) {
                rel_names.push("=".to_string());
                continue;
            }
            if let Some((n, _)) = declared
                .iter()
                .find(|(n, r)| *r == &c.relation && (n == &c.name || n.starts_with(&format!("{}__", c.name))))
            {
                rel_names.push(n.clone());
                continue;
            }
            let mut name = c.name.clone();
            let mut suffix = 1usize;
            while declared.iter().any(|(n, _)| n == &name) {
                suffix += 1;
                name = format!("{}__{}", c.name, suffix);
            }
            declared.push((name.clone(), &c.relation));
            rel_names.push(name);
        }
        let mut out = String::new();
        writeln!(out, "domain {}", self.domain_size).unwrap();
        for (name, r) in &declared {
            writeln!(out, "relation {} {}", name, r.arity).unwrap();
            for t in r.tuples() {
                let row: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
            writeln!(out, "end").unwrap();
        }
        let full: Vec<usize> = (0..self.domain_size).collect();
        for (name, dom) in self.variables.iter().zip(&self.domains) {
            if dom == &full {
                writeln!(out, "var {name}").unwrap();
            } else {
                let vals: Vec<String> = dom.iter().map(|v| v.to_string()).collect();
                writeln!(out, "var {} {}", name, vals.join(" ")).unwrap();
            }
        }
        for (c, rel_name) in self.constraints.iter().zip(&rel_names) {
            let scope: Vec<&str> = c.scope.iter().map(|&v| self.variables[v].as_str()).collect();
            writeln!(out, "constraint {} {}", rel_name, scope.join(" ")).unwrap();
        }
        out
    }

    /// Checks a full assignment against every constraint.
    pub fn satisfied_by(&self, assignment: &[usize]) -> bool {
        assignment.len() == self.var_count()
            && assignment
                .iter()
                .zip(&self.domains)
                .all(|(v, d)| d.contains(v))
            && self.constraints.iter().all(|c| {
                let tuple: Vec<usize> = c.scope.iter().map(|&v| assignment[v]).collect();
                c.relation.contains(&tuple)
            })
    }
}

/// Projects a constraint onto the given variables (in order): tuples
/// are filtered so repeated occurrences of a variable in the scope
/// agree, then the value of each requested variable is read off.
///
/// All requested variables must occur in the scope.
fn project_constraint(c: &Constraint, vars: &[usize]) -> Option<Relation> {
    let positions: Option<Vec<usize>> = vars
        .iter()
        .map(|&v| c.scope.iter().position(|&s| s == v))
        .collect();
    let positions = positions?;
    let mut tuples = Vec::new();
    'outer: for t in c.relation.tuples() {
        // repeated scope variables must take a single value
        for (i, &vi) in c.scope.iter().enumerate() {
            for (j, &vj) in c.scope.iter().enumerate().skip(i + 1) {
                if vi == vj && t[i] != t[j] {
                    continue 'outer;
                }
            }
        }
        tuples.push(positions.iter().map(|&p| t[p]).collect());
    }
    Some(Relation::new(vars.len(), c.relation.domain_size, tuples).expect("projection in range"))
}

/// A map variable -> domain subset, as produced by [`check_cc`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub domains: Vec<Vec<usize>>,
}

impl Reduction {
    /// The empty reduction: all components empty.
    pub fn is_empty_reduction(&self) -> bool {
        self.domains.iter().all(|d| d.is_empty())
    }

    /// Pointwise inclusion in the instance's current domains.
    pub fn refines(&self, inst: &CSPInstance) -> bool {
        self.domains.len() == inst.domains.len()
            && self
                .domains
                .iter()
                .zip(&inst.domains)
                .all(|(r, d)| r.iter().all(|v| d.contains(v)))
    }

    /// Whether the reduction leaves every domain unchanged.
    pub fn is_identity_on(&self, inst: &CSPInstance) -> bool {
        self.domains == inst.domains
    }
}

/// The binary projections `R_{u,v}` of an instance, including the
/// diagonal relations `R_{u,u}`, plus the fixpoint iteration counter.
#[derive(Debug, Clone)]
pub struct BinaryProjectionTable {
    pub var_count: usize,
    pairs: Vec<Relation>,
    pub iterations: u64,
}

impl BinaryProjectionTable {
    pub fn get(&self, u: usize, v: usize) -> &Relation {
        &self.pairs[u * self.var_count + v]
    }

    fn set(&mut self, u: usize, v: usize, r: Relation) {
        self.pairs[u * self.var_count + v] = r;
    }
}

/// Computes the initial binary projections:
/// `R_u = D_u ∩ ⋂ proj_u(C)` over constraints mentioning `u`,
/// `R_{u,v} = (⋂ proj_{u,v}(C)) ∩ (R_u × R_v)` over constraints
/// mentioning both, and `R_{u,u}` the diagonal of `R_u`.
pub fn binary_projections(inst: &CSPInstance) -> BinaryProjectionTable {
    let n = inst.var_count();
    let k = inst.domain_size;
    let unary: Vec<Relation> = (0..n)
        .map(|u| {
            let mut r = Relation::unary(k, inst.domains[u].iter().copied());
            for c in &inst.constraints {
                if let Some(p) = project_constraint(c, &[u]) {
                    r = r.intersect(&p).unwrap();
                }
            }
            r
        })
        .collect();
    let mut table = BinaryProjectionTable {
        var_count: n,
        pairs: vec![Relation::empty(2, k); n * n],
        iterations: 0,
    };
    for u in 0..n {
        for v in 0..n {
            let r = if u == v {
                Relation::diagonal_of(k, unary[u].tuples().iter().map(|t| t[0]))
            } else {
                let mut r = unary[u].product(&unary[v]).unwrap();
                for c in &inst.constraints {
                    if let Some(p) = project_constraint(c, &[u, v]) {
                        r = r.intersect(&p).unwrap();
                    }
                }
                r
            };
            table.set(u, v, r);
        }
    }
    table
}

/// Result of the `CheckCC` algorithm: the reduction `D^(⊥)` together
/// with the fixpoint projection table.
#[derive(Debug, Clone)]
pub struct CheckCCResult {
    pub reduction: Reduction,
    pub table: BinaryProjectionTable,
}

/// Runs the `CheckCC` composition fixpoint:
/// `R'_{u,v} := R_{u,v} ∩ (R_{u,w} ∘ R_{w,v})` for all triples until
/// nothing changes, then reads off `D^(⊥)_u = proj_1(R_{u,u})`.
///
/// The number of outer passes is asserted against the theoretical
/// `2^(k²) · |Var|²` bound (each of the `|Var|²` relations can only
/// shrink `2^(k²)` times).
pub fn check_cc(inst: &CSPInstance) -> CheckCCResult {
    let n = inst.var_count();
    let k = inst.domain_size;
    let mut table = binary_projections(inst);
    let bound = 2u64
        .checked_pow((k * k) as u32)
        .and_then(|b| b.checked_mul((n * n) as u64 + 1))
        .unwrap_or(u64::MAX);
    loop {
        let mut changed = false;
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let composed = model::relation_compose(table.get(u, w), table.get(w, v)).unwrap();
                    let refined = table.get(u, v).intersect(&composed).unwrap();
                    if &refined != table.get(u, v) {
                        changed = true;
                        table.set(u, v, refined);
                    }
                }
            }
        }
        table.iterations += 1;
        assert!(table.iterations <= bound, "CheckCC exceeded its iteration bound");
        if !changed {
            break;
        }
    }
    let domains = (0..n)
        .map(|u| table.get(u, u).tuples().iter().map(|t| t[0]).collect())
        .collect();
    CheckCCResult {
        reduction: Reduction { domains },
        table,
    }
}

/// Applies a reduction: domains are replaced and every constraint
/// relation is materialized as its intersection with the product of the
/// new domains over its scope.
pub fn apply_reduction(inst: &CSPInstance, red: &Reduction) -> CSPInstance {
    debug_assert!(red.refines(inst), "reduction must refine the instance");
    let constraints = inst
        .constraints
        .iter()
        .map(|c| {
            let tuples = c
                .relation
                .tuples()
                .iter()
                .filter(|t| {
                    t.iter()
                        .zip(&c.scope)
                        .all(|(v, &var)| red.domains[var].contains(v))
                })
                .cloned()
                .collect();
            Constraint {
                name: c.name.clone(),
                relation: Relation::new(c.relation.arity, inst.domain_size, tuples).unwrap(),
                scope: c.scope.clone(),
            }
        })
        .collect();
    CSPInstance {
        domain_size: inst.domain_size,
        variables: inst.variables.clone(),
        domains: red.domains.clone(),
        constraints,
    }
}

/// Outcome of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    /// A nonempty cycle-consistent reduction was reached; `final_instance`
    /// is the reduced instance and `trace` lists the reductions applied.
    Ok {
        final_instance: CSPInstance,
        trace: Vec<Reduction>,
    },
    /// The instance has no solutions (sound).
    NoSolution,
}

impl SolveOutcome {
    pub fn is_no_solution(&self) -> bool {
        matches!(self, SolveOutcome::NoSolution)
    }
}

/// The `Solve` algorithm: alternate `CheckCC` and reduction until the
/// reduction is empty (`NoSolution`) or a fixpoint `D^(⊥) = D` is
/// reached (`Ok`). Termination: every round strictly shrinks the total
/// domain size, so the depth is at most `Σ|D_x|`.
pub fn solve(inst: &CSPInstance) -> SolveOutcome {
    let mut current = inst.clone();
    let mut trace = Vec::new();
    loop {
        let result = check_cc(&current);
        if result.reduction.is_empty_reduction() && current.var_count() > 0 {
            return SolveOutcome::NoSolution;
        }
        if result.reduction.is_identity_on(&current) {
            return SolveOutcome::Ok {
                final_instance: current,
                trace,
            };
        }
        current = apply_reduction(&current, &result.reduction);
        trace.push(result.reduction);
    }
}

/// Outcome of the brute-force oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOutcome {
    Sat(Vec<usize>),
    Unsat,
    /// Node limit hit before the search finished; never a wrong answer.
    LimitExceeded,
}

/// Default node limit for [`brute_force_solve`].
pub const BRUTE_NODE_LIMIT: u64 = 100_000_000;

/// Exhaustive backtracking search in lexicographic variable order with
/// forward checking. Returns the lexicographically least satisfying
/// assignment, `Unsat`, or `LimitExceeded` once `node_limit` candidate
/// assignments have been tried.
pub fn brute_force_solve(inst: &CSPInstance, node_limit: u64) -> BruteOutcome {
    let n = inst.var_count();
    if inst.domains.iter().any(|d| d.is_empty()) {
        return BruteOutcome::Unsat;
    }
    // constraints indexed by the last variable of their scope, checked
    // as soon as that variable is assigned
    let mut by_last: Vec<Vec<&Constraint>> = vec![Vec::new(); n.max(1)];
    for c in &inst.constraints {
        match c.scope.iter().copied().max() {
            Some(last) => by_last[last].push(c),
            None => {
                if c.relation.is_empty() {
                    return BruteOutcome::Unsat;
                }
            }
        }
    }
    let mut assignment = vec![0usize; n];
    let mut nodes = 0u64;
    fn descend(
        inst: &CSPInstance,
        by_last: &[Vec<&Constraint>],
        depth: usize,
        assignment: &mut Vec<usize>,
        nodes: &mut u64,
        node_limit: u64,
    ) -> Option<BruteOutcome> {
        if depth == inst.var_count() {
            return Some(BruteOutcome::Sat(assignment.clone()));
        }
        for &v in &inst.domains[depth] {
            *nodes += 1;
            if *nodes > node_limit {
                return Some(BruteOutcome::LimitExceeded);
            }
            assignment[depth] = v;
            let ok = by_last[depth].iter().all(|c| {
                let tuple: Vec<usize> = c.scope.iter().map(|&var| assignment[var]).collect();
                c.relation.contains(&tuple)
            });
            if ok {
                if let Some(out) = descend(inst, by_last, depth + 1, assignment, nodes, node_limit) {
                    return Some(out);
                }
            }
        }
        None
    }
    match descend(inst, &by_last, 0, &mut assignment, &mut nodes, node_limit) {
        Some(out) => out,
        None => BruteOutcome::Unsat,
    }
}

/// 1-consistency: every domain is nonempty and, for every constraint
/// and every variable in its scope, every domain value extends to a
/// tuple of the constraint.
pub fn is_1_consistent(inst: &CSPInstance) -> bool {
    if inst.domains.iter().any(|d| d.is_empty()) {
        return false;
    }
    inst.constraints.iter().all(|c| {
        c.scope.iter().all(|&u| {
            let proj = project_constraint(c, &[u]).unwrap();
            inst.domains[u].iter().all(|&a| proj.contains(&[a]))
        })
    })
}

/// Bounded cycle-consistency check: 1-consistency plus, for every
/// variable `z` and every cyclic path through at most `max_path_len`
/// constraints, every value of `D_z` must propagate along the path back
/// to itself.
///
/// The definition quantifies over *all* paths; this is an exact check
/// only up to the bound. The global criterion is the `CheckCC` fixpoint.
pub fn is_cycle_consistent_bounded(inst: &CSPInstance, max_path_len: usize) -> bool {
    if !is_1_consistent(inst) {
        return false;
    }
    let n = inst.var_count();
    // distinct one-step binary projections between each ordered pair
    let mut edges: Vec<Vec<Relation>> = vec![Vec::new(); n * n];
    for c in &inst.constraints {
        for &u in &c.scope {
            for &v in &c.scope {
                let p = project_constraint(c, &[u, v]).unwrap();
                let slot = &mut edges[u * n + v];
                if !slot.contains(&p) {
                    slot.push(p);
                }
            }
        }
    }
    for z in 0..n {
        // BFS over states (current variable, composed relation from z)
        let start = Relation::diagonal_of(inst.domain_size, inst.domains[z].iter().copied());
        let mut layer: Vec<(usize, Relation)> = vec![(z, start)];
        let mut seen: Vec<(usize, Relation)> = layer.clone();
        for _ in 0..max_path_len {
            let mut next = Vec::new();
            for (u, rel) in &layer {
                for v in 0..n {
                    for step in &edges[u * n + v] {
                        let composed = model::relation_compose(rel, step).unwrap();
                        if v == z {
                            // every a in D_z must come back to itself
                            if !inst.domains[z].iter().all(|&a| composed.contains(&[a, a])) {
                                return false;
                            }
                        }
                        let state = (v, composed);
                        if !seen.contains(&state) {
                            seen.push(state.clone());
                            next.push(state);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layer = next;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// instance file format

/// Parses the instance file format:
///
/// ```text
/// language <path>          # or an inline `domain`/`relation` block
/// var <name> [values...]   # omitted list = full domain
/// constraint <rel> <var...>
/// ```
///
/// `resolve` loads the text of a referenced language file; the built-in
/// relation `=` denotes equality and needs no declaration.
pub fn parse_instance(
    input: &str,
    resolve: &dyn Fn(&str) -> std::io::Result<String>,
) -> Result<(CSPInstance, ConstraintLanguage)> {
    let parse_err = |line: usize, message: String| ModelError::Parse { line, message };
    let mut lang: Option<ConstraintLanguage> = None;
    let mut inline_domain: Option<usize> = None;
    let mut inline_relations: BTreeMap<String, Relation> = BTreeMap::new();
    let mut vars: Vec<(usize, String, Option<Vec<usize>>)> = Vec::new();
    let mut cons: Vec<(usize, String, Vec<String>)> = Vec::new();

    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let stripped = match l.find('#') {
                Some(pos) => &l[..pos],
                None => l,
            };
            (i + 1, stripped.trim().to_string())
        })
        .filter(|(_, l)| !l.is_empty());
    while let Some((line_no, line)) = lines.next() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("language") => {
                let path = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "language needs a path".into()))?;
                let text = resolve(path).map_err(|e| {
                    parse_err(line_no, format!("cannot load language {path:?}: {e}"))
                })?;
                lang = Some(model::parse_language(&text)?);
            }
            Some("domain") => {
                let k: usize = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "bad domain size".into()))?;
                inline_domain = Some(k);
            }
            Some("relation") => {
                let k = inline_domain
                    .ok_or_else(|| parse_err(line_no, "relation before domain".into()))?;
                let name = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "relation needs a name".into()))?
                    .to_string();
                let arity: usize = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "bad arity".into()))?;
                let mut tuples = Vec::new();
                let mut end_seen = false;
                for (ln, l) in lines.by_ref() {
                    if l == "end" {
                        end_seen = true;
                        break;
                    }
                    let tuple: Vec<usize> = l
                        .split_whitespace()
                        .map(|tok| {
                            tok.parse::<usize>()
                                .map_err(|_| parse_err(ln, format!("bad tuple entry {tok:?}")))
                        })
                        .collect::<Result<_>>()?;
                    if tuple.len() != arity {
                        return Err(parse_err(ln, "tuple arity mismatch".into()));
                    }
                    tuples.push(tuple);
                }
                if !end_seen {
                    return Err(parse_err(line_no, "relation block not closed with `end`".into()));
                }
                inline_relations.insert(name, Relation::new(arity, k, tuples)?);
            }
            Some("var") => {
                let name = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "var needs a name".into()))?
                    .to_string();
                let values: Vec<usize> = parts
                    .map(|tok| {
                        tok.parse::<usize>()
                            .map_err(|_| parse_err(line_no, format!("bad domain value {tok:?}")))
                    })
                    .collect::<Result<_>>()?;
                vars.push((line_no, name, if values.is_empty() { None } else { Some(values) }));
            }
            Some("constraint") => {
                let rel = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "constraint needs a relation".into()))?
                    .to_string();
                let scope: Vec<String> = parts.map(|s| s.to_string()).collect();
                cons.push((line_no, rel, scope));
            }
            Some(other) => {
                return Err(parse_err(line_no, format!("unexpected token {other:?}")));
            }
            None => {}
        }
    }

    let lang = match (lang, inline_domain) {
        (Some(l), None) => l,
        (None, Some(k)) => ConstraintLanguage::new(crate::model::Domain::new(k), inline_relations)?,
        (Some(_), Some(_)) => {
            return Err(parse_err(0, "both `language` and an inline language block given".into()))
        }
        (None, None) => return Err(parse_err(0, "no language given".into())),
    };
    let mut inst = CSPInstance::new(lang.domain.size);
    for (line_no, name, domain) in vars {
        inst.add_variable(name, domain).map_err(|e| match e {
            ModelError::Parse { message, .. } => parse_err(line_no, message),
            other => other,
        })?;
    }
    for (line_no, rel_name, scope_names) in cons {
        let relation = if rel_name == "=" {
            Relation::equality(lang.domain.size)
        } else {
            lang.relation(&rel_name)?.clone()
        };
        let scope: Vec<usize> = scope_names
            .iter()
            .map(|s| {
                inst.variable_index(s)
                    .ok_or_else(|| parse_err(line_no, format!("unknown variable {s:?}")))
            })
            .collect::<Result<_>>()?;
        inst.add_constraint(rel_name, relation, scope)?;
    }
    Ok((inst, lang))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::r_aff;

    fn neq() -> Relation {
        Relation::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    pub(crate) fn neq_triangle() -> CSPInstance {
        let mut inst = CSPInstance::new(2);
        for name in ["x", "y", "z"] {
            inst.add_variable(name, None).unwrap();
        }
        inst.add_constraint("neq", neq(), vec![0, 1]).unwrap();
        inst.add_constraint("neq", neq(), vec![1, 2]).unwrap();
        inst.add_constraint("neq", neq(), vec![2, 0]).unwrap();
        inst
    }

    /// The unsatisfiable-but-cycle-consistent linear system over Z2:
    /// x1+x2=x3, x3=x4+x5, x4=x1+x6, x5+x6=x2+1, encoded with the
    /// 4-ary relation x1+x2=x3+x4 and constant constraints on z1..z4.
    pub(crate) fn linear_counterexample_z2() -> CSPInstance {
        let mut inst = CSPInstance::new(2);
        for i in 1..=6 {
            inst.add_variable(format!("x{i}"), None).unwrap();
        }
        for i in 1..=4 {
            inst.add_variable(format!("z{i}"), None).unwrap();
        }
        let x = |i: usize| i - 1;
        let z = |i: usize| 5 + i;
        let aff = r_aff(2);
        for i in 1..=3 {
            inst.add_constraint("c0", Relation::unary(2, [0]), vec![z(i)]).unwrap();
        }
        inst.add_constraint("c1", Relation::unary(2, [1]), vec![z(4)]).unwrap();
        inst.add_constraint("aff", aff.clone(), vec![x(1), x(2), x(3), z(1)]).unwrap();
        inst.add_constraint("aff", aff.clone(), vec![x(3), z(2), x(4), x(5)]).unwrap();
        inst.add_constraint("aff", aff.clone(), vec![x(4), z(3), x(1), x(6)]).unwrap();
        inst.add_constraint("aff", aff, vec![x(5), x(6), x(2), z(4)]).unwrap();
        inst
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_solve(&neq_triangle(), BRUTE_NODE_LIMIT), BruteOutcome::Unsat);

        let mut eq_inst = CSPInstance::new(2);
        eq_inst.add_variable("x", None).unwrap();
        eq_inst.add_variable("y", None).unwrap();
        eq_inst.add_constraint("=", Relation::equality(2), vec![0, 1]).unwrap();
        assert_eq!(
            brute_force_solve(&eq_inst, BRUTE_NODE_LIMIT),
            BruteOutcome::Sat(vec![0, 0])
        );

        assert_eq!(
            brute_force_solve(&linear_counterexample_z2(), BRUTE_NODE_LIMIT),
            BruteOutcome::Unsat
        );

        assert_eq!(brute_force_solve(&eq_inst, 1), BruteOutcome::LimitExceeded);
    }

    #[test]
    fn binary_projection_examples() {
        let mut inst = CSPInstance::new(2);
        inst.add_variable("x", None).unwrap();
        inst.add_variable("y", None).unwrap();
        inst.add_constraint("neq", neq(), vec![0, 1]).unwrap();
        let table = binary_projections(&inst);
        assert_eq!(table.get(0, 1), &neq());
        assert_eq!(table.get(0, 0), &Relation::equality(2));

        let leq = Relation::new(2, 2, vec![vec![0, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let geq = Relation::new(2, 2, vec![vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap();
        let mut inst2 = CSPInstance::new(2);
        inst2.add_variable("x", None).unwrap();
        inst2.add_variable("y", None).unwrap();
        inst2.add_constraint("leq", leq, vec![0, 1]).unwrap();
        inst2.add_constraint("geq", geq, vec![0, 1]).unwrap();
        assert_eq!(binary_projections(&inst2).get(0, 1), &Relation::equality(2));

        // repeated scope: R(x,x) filters to the consistent diagonal
        let mut inst3 = CSPInstance::new(2);
        inst3.add_variable("x", None).unwrap();
        let r = Relation::new(2, 2, vec![vec![0, 1], vec![1, 1]]).unwrap();
        inst3.add_constraint("r", r, vec![0, 0]).unwrap();
        let t3 = binary_projections(&inst3);
        assert_eq!(t3.get(0, 0), &Relation::diagonal_of(2, [1]));
    }

    #[test]
    fn check_cc_examples() {
        let result = check_cc(&neq_triangle());
        assert!(result.reduction.is_empty_reduction());

        let mut eq_inst = CSPInstance::new(2);
        eq_inst.add_variable("x", None).unwrap();
        eq_inst.add_variable("y", None).unwrap();
        eq_inst.add_constraint("=", Relation::equality(2), vec![0, 1]).unwrap();
        let result = check_cc(&eq_inst);
        assert!(result.reduction.is_identity_on(&eq_inst));

        // the unsatisfiable linear instance is invisible to CheckCC
        let inst = linear_counterexample_z2();
        let result = check_cc(&inst);
        let expected: Vec<Vec<usize>> = inst
            .variables
            .iter()
            .map(|v| if v.starts_with('z') { vec![usize::from(v == "z4")] } else { vec![0, 1] })
            .collect();
        assert_eq!(result.reduction.domains, expected);
    }

    #[test]
    fn check_cc_fixpoint_is_composition_closed() {
        for inst in [neq_triangle(), linear_counterexample_z2()] {
            let result = check_cc(&inst);
            let n = inst.var_count();
            for u in 0..n {
                for v in 0..n {
                    for w in 0..n {
                        let composed =
                            model::relation_compose(result.table.get(u, w), result.table.get(w, v))
                                .unwrap();
                        assert!(result.table.get(u, v).is_subset_of(&composed));
                    }
                }
            }
        }
    }

    #[test]
    fn apply_reduction_examples() {
        let mut inst = CSPInstance::new(2);
        inst.add_variable("x", None).unwrap();
        inst.add_variable("y", None).unwrap();
        inst.add_constraint("neq", neq(), vec![0, 1]).unwrap();

        let red = Reduction { domains: vec![vec![0], vec![0, 1]] };
        let reduced = apply_reduction(&inst, &red);
        assert_eq!(
            reduced.constraints[0].relation,
            Relation::new(2, 2, vec![vec![0, 1]]).unwrap()
        );
        assert_eq!(reduced.domains[1], vec![0, 1]);

        let empty = Reduction { domains: vec![vec![], vec![]] };
        let emptied = apply_reduction(&inst, &empty);
        assert!(emptied.constraints[0].relation.is_empty());

        let identity = Reduction { domains: inst.domains.clone() };
        assert_eq!(apply_reduction(&inst, &identity), inst);
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve(&neq_triangle()), SolveOutcome::NoSolution);

        // satisfiable instance over majority-preserved relations
        let leq = Relation::new(2, 2, vec![vec![0, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let mut inst = CSPInstance::new(2);
        for name in ["x", "y", "z"] {
            inst.add_variable(name, None).unwrap();
        }
        inst.add_constraint("leq", leq.clone(), vec![0, 1]).unwrap();
        inst.add_constraint("leq", leq, vec![1, 2]).unwrap();
        inst.add_constraint("c1", Relation::unary(2, [1]), vec![0]).unwrap();
        match solve(&inst) {
            SolveOutcome::Ok { final_instance, .. } => {
                assert_eq!(final_instance.domains, vec![vec![1], vec![1], vec![1]]);
            }
            SolveOutcome::NoSolution => panic!("satisfiable instance rejected"),
        }
        assert!(matches!(brute_force_solve(&inst, BRUTE_NODE_LIMIT), BruteOutcome::Sat(_)));

        // unsatisfiable yet cycle-consistent: Solve answers Ok
        let counterexample = linear_counterexample_z2();
        assert!(matches!(solve(&counterexample), SolveOutcome::Ok { .. }));
        assert_eq!(
            brute_force_solve(&counterexample, BRUTE_NODE_LIMIT),
            BruteOutcome::Unsat
        );
    }

    #[test]
    fn consistency_examples() {
        let mut inst = CSPInstance::new(2);
        inst.add_variable("x", None).unwrap();
        inst.add_variable("y", None).unwrap();
        inst.add_constraint("r", Relation::new(2, 2, vec![vec![0, 1]]).unwrap(), vec![0, 1])
            .unwrap();
        assert!(!is_1_consistent(&inst));

        let mut eq_inst = CSPInstance::new(2);
        eq_inst.add_variable("x", None).unwrap();
        eq_inst.add_variable("y", None).unwrap();
        eq_inst.add_constraint("=", Relation::equality(2), vec![0, 1]).unwrap();
        assert!(is_1_consistent(&eq_inst));
        assert!(is_cycle_consistent_bounded(&eq_inst, 6));

        assert!(!is_cycle_consistent_bounded(&neq_triangle(), 4));

        let counterexample = linear_counterexample_z2();
        let reduced = match solve(&counterexample) {
            SolveOutcome::Ok { final_instance, .. } => final_instance,
            SolveOutcome::NoSolution => panic!("Solve must answer Ok here"),
        };
        assert!(is_cycle_consistent_bounded(&reduced, 8));
    }

    #[test]
    fn parse_instance_round_trip() {
        let text = "\
domain 2
relation neq 2
0 1
1 0
end
var x
var y 0 1
var z
constraint neq x y
constraint neq y z
constraint neq z x
";
        let (inst, lang) = parse_instance(text, &|_| unreachable!()).unwrap();
        assert_eq!(lang.domain.size, 2);
        assert_eq!(inst, neq_triangle());

        let with_lang = "language base.lang\nvar x\nvar y\nconstraint = x y\n";
        let (inst2, _) = parse_instance(with_lang, &|path| {
            assert_eq!(path, "base.lang");
            Ok("domain 2\n".to_string())
        })
        .unwrap();
        assert_eq!(inst2.constraints[0].relation, Relation::equality(2));

        assert!(parse_instance("var x\n", &|_| unreachable!()).is_err());
        let bad = "domain 2\nvar x\nconstraint neq x x\n";
        assert!(matches!(
            parse_instance(bad, &|_| unreachable!()),
            Err(ModelError::UnknownRelation(_))
        ));
    }

    #[test]
    fn format_instance_round_trips() {
        for inst in [neq_triangle(), linear_counterexample_z2()] {
            let text = inst.format_instance();
            let (parsed, _) = parse_instance(&text, &|_| unreachable!()).unwrap();
            assert_eq!(parsed, inst);
        }

        // equality constraints and name collisions between different relations
        let mut inst = CSPInstance::new(2);
        inst.add_variable("x", None).unwrap();
        inst.add_variable("y", Some(vec![1])).unwrap();
        inst.add_constraint("=", Relation::equality(2), vec![0, 1]).unwrap();
        inst.add_constraint("r", Relation::unary(2, [0]), vec![0]).unwrap();
        inst.add_constraint("r", Relation::unary(2, [1]), vec![1]).unwrap();
        let (parsed, _) = parse_instance(&inst.format_instance(), &|_| unreachable!()).unwrap();
        assert_eq!(parsed.domains, inst.domains);
        assert_eq!(
            parsed.constraints[2].relation.tuples(),
            inst.constraints[2].relation.tuples()
        );
    }
}
