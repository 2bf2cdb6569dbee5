//! Language-level transformations: core reduction, restoring constant
//! relations via the σ-definition, the NAE₃ hardness gadget, the linear
//! counterexample generator, and a bounded pp-definability search.

use crate::closure;
use crate::model::{
    self, Atom, ConstraintLanguage, Domain, ModelError, Operation, PPFormula, Relation, Result,
};
use crate::solver::CSPInstance;
use crate::wnu::Blocker;
use serde::Serialize;
use std::collections::BTreeMap;

/// A core reduction: a minimal-range unary polymorphism `f`, the image
/// language `f(Γ)` renamed to a contiguous domain, and the renaming.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoreReduction {
    /// The chosen minimal-range unary polymorphism over the original domain.
    pub f: Operation,
    /// Sorted range of `f`; `range[i]` is the original element renamed to `i`.
    pub range: Vec<usize>,
    /// The core language `f(Γ)` on domain `0..range.len()-1`, with the
    /// original relation names (so the Σ mapping back to Γ is by name).
    pub core: ConstraintLanguage,
}

impl CoreReduction {
    /// Original element → core element (`f` followed by renaming).
    pub fn map_element(&self, a: usize) -> usize {
        let img = self.f.eval(&[a]);
        self.range.iter().position(|&v| v == img).unwrap()
    }

    /// The `f`-image of an instance over Γ, as an instance over `f(Γ)`.
    pub fn map_instance(&self, inst: &CSPInstance) -> CSPInstance {
        let mut out = CSPInstance::new(self.range.len());
        for (name, dom) in inst.variables.iter().zip(&inst.domains) {
            let mapped: Vec<usize> = dom.iter().map(|&v| self.map_element(v)).collect();
            out.add_variable(name.clone(), Some(mapped)).unwrap();
        }
        for c in &inst.constraints {
            let tuples = c
                .relation
                .tuples()
                .iter()
                .map(|t| t.iter().map(|&v| self.map_element(v)).collect())
                .collect();
            let rel = Relation::new(c.relation.arity, self.range.len(), tuples).unwrap();
            out.add_constraint(c.name.clone(), rel, c.scope.clone()).unwrap();
        }
        out
    }
}

/// Computes a core of the language: picks the lexicographically least
/// unary polymorphism of minimal range, maps every relation through it,
/// and renames the range to `0..r-1`. The result is verified to be a
/// core (all of its unary polymorphisms are bijective).
pub fn core_of(lang: &ConstraintLanguage) -> CoreReduction {
    let polys = closure::find_unary_polymorphisms(lang);
    let best = polys
        .iter()
        .min_by(|a, b| {
            a.range
                .len()
                .cmp(&b.range.len())
                .then(a.op.table.cmp(&b.op.table))
        })
        .expect("the identity is always a unary polymorphism");
    let f = best.op.clone();
    let range = best.range.clone();
    let rename = |v: usize| range.iter().position(|&x| x == v).unwrap();
    let relations: Vec<(String, Relation)> = lang
        .relations
        .iter()
        .map(|(name, r)| {
            let tuples = r
                .tuples()
                .iter()
                .map(|t| t.iter().map(|&v| rename(f.eval(&[v]))).collect())
                .collect();
            (
                name.clone(),
                Relation::new(r.arity, range.len(), tuples).unwrap(),
            )
        })
        .collect();
    let core = ConstraintLanguage::new(Domain::new(range.len()), relations).unwrap();
    debug_assert!(
        closure::find_unary_polymorphisms(&core)
            .iter()
            .all(|p| p.bijective),
        "f(Γ) with f of minimal range must be a core"
    );
    CoreReduction { f, range, core }
}

/// The quantifier-free σ-definition of Lemma 5.3 over variables
/// `z₀,…,z_{k-1}`: the conjunction of `R(z_{a₁},…,z_{a_s})` over every
/// relation `R` and every tuple of `R`. Atoms are deduplicated and
/// emitted in canonical order.
///
/// Its evaluation is exactly the set of tuples `(b₀,…,b_{k-1})` such
/// that `x ↦ b_x` is a unary polymorphism of the language.
pub fn sigma_definition(lang: &ConstraintLanguage) -> PPFormula {
    let k = lang.domain.size;
    let mut atoms: Vec<Atom> = lang
        .relations
        .iter()
        .flat_map(|(name, r)| {
            r.tuples().iter().map(move |t| Atom::Rel {
                name: name.clone(),
                vars: t.clone(),
            })
        })
        .collect();
    atoms.sort();
    atoms.dedup();
    PPFormula::new(k, 0, atoms)
}

/// Rewrites an instance over `Γ ∪ {constants}` into an instance over
/// `Γ` (plus built-in equality): introduces `z₀,…,z_{k-1}`, replaces
/// every constant constraint `x = a` (a unary singleton relation) by
/// `x = z_a`, and appends the σ-definition atoms over the `z`
/// variables. For a core `Γ` the result is equisatisfiable.
pub fn add_constants_instance(inst: &CSPInstance, core: &ConstraintLanguage) -> CSPInstance {
    let k = core.domain.size;
    assert_eq!(inst.domain_size, k, "instance and core language must share the domain");
    let mut out = CSPInstance::new(k);
    for (name, dom) in inst.variables.iter().zip(&inst.domains) {
        out.add_variable(name.clone(), Some(dom.clone())).unwrap();
    }
    let z: Vec<usize> = (0..k)
        .map(|a| {
            let mut name = format!("z{a}");
            while out.variable_index(&name).is_some() {
                name.push('_');
            }
            out.add_variable(name, None).unwrap()
        })
        .collect();
    for c in &inst.constraints {
        if c.relation.arity == 1 && c.relation.len() == 1 {
            let a = c.relation.tuples()[0][0];
            out.add_constraint("=", Relation::equality(k), vec![c.scope[0], z[a]])
                .unwrap();
        } else {
            out.add_constraint(c.name.clone(), c.relation.clone(), c.scope.clone())
                .unwrap();
        }
    }
    for atom in sigma_definition(core).atoms {
        let Atom::Rel { name, vars } = atom else { continue };
        let scope = vars.iter().map(|&a| z[a]).collect();
        out.add_constraint(name.clone(), core.relations[&name].clone(), scope)
            .unwrap();
    }
    out
}

/// A gadget instance plus the provenance of its variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GadgetOutput {
    pub instance: CSPInstance,
    /// Source entity (`"v<id>"` for NAE variables, `"triple<i>/<j>"` for
    /// fresh existentials) → target variable name.
    pub provenance: BTreeMap<String, String>,
}

/// Parses the NAE input format: one triple of positive integer variable
/// ids per line; `#` starts a comment.
pub fn parse_nae(input: &str) -> Result<Vec<[usize; 3]>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| ModelError::Parse {
                    line: i + 1,
                    message: format!("bad variable id {tok:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if ids.len() != 3 || ids.contains(&0) {
            return Err(ModelError::Parse {
                line: i + 1,
                message: "expected a triple of positive variable ids".to_string(),
            });
        }
        out.push([ids[0], ids[1], ids[2]]);
    }
    Ok(out)
}

/// The NAE₃ source instance itself: Boolean variables, one NAE₃
/// constraint per triple. Used as the satisfiability reference for
/// gadget outputs.
pub fn nae_instance(nae: &[[usize; 3]]) -> CSPInstance {
    let nae3 = Blocker::Wnu { b0: vec![0], b1: vec![1] }.materialize(2);
    let mut inst = CSPInstance::new(2);
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ids: Vec<usize> = nae.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        index.insert(id, inst.add_variable(format!("v{id}"), None).unwrap());
    }
    for t in nae {
        inst.add_constraint("nae3", nae3.clone(), t.iter().map(|id| index[id]).collect())
            .unwrap();
    }
    inst
}

/// Instantiates a pp-formula as constraints on an instance: free slots
/// bind to `free_vars`, existential variables become fresh variables
/// named `{prefix}{j}`.
fn instantiate_formula(
    inst: &mut CSPInstance,
    lang: &ConstraintLanguage,
    formula: &PPFormula,
    free_vars: &[usize],
    prefix: &str,
) -> Vec<usize> {
    assert_eq!(free_vars.len(), formula.free_count);
    let k = lang.domain.size;
    let fresh: Vec<usize> = (0..formula.existential_count)
        .map(|j| inst.add_variable(format!("{prefix}{j}"), None).unwrap())
        .collect();
    let map = |v: usize| {
        if v < formula.free_count {
            free_vars[v]
        } else {
            fresh[v - formula.free_count]
        }
    };
    for atom in &formula.atoms {
        match atom {
            Atom::Eq(a, b) => inst
                .add_constraint("=", Relation::equality(k), vec![map(*a), map(*b)])
                .unwrap(),
            Atom::Rel { name, vars } => inst
                .add_constraint(
                    name.clone(),
                    lang.relations[name].clone(),
                    vars.iter().map(|&v| map(v)).collect(),
                )
                .unwrap(),
        }
    }
    fresh
}

fn verify_ppdef(
    lang: &ConstraintLanguage,
    ppdef: &PPFormula,
    expected: &Relation,
    what: &str,
) -> Result<()> {
    let got = closure::eval_pp_formula(lang, ppdef)?;
    if &got != expected {
        let diff = expected
            .tuples()
            .iter()
            .find(|t| !got.contains(t))
            .or_else(|| got.tuples().iter().find(|t| !expected.contains(t)));
        return Err(ModelError::Verify(format!(
            "pp-definition does not define the {what}; differing tuple {:?}",
            diff.expect("relations differ")
        )));
    }
    Ok(())
}

/// Theorem 5.5 gadget: replaces each NAE₃ constraint of the source by a
/// copy of the blocker's pp-definition over the target language, with
/// the blocker's `B₀`/`B₁` sides playing 0/1. The pp-definition is
/// checked against the materialized blocker first.
pub fn nae_gadget(
    lang: &ConstraintLanguage,
    blocker: &Blocker,
    ppdef: &PPFormula,
    nae: &[[usize; 3]],
) -> Result<GadgetOutput> {
    let Blocker::Wnu { .. } = blocker else {
        return Err(ModelError::Verify("the NAE gadget needs a WNU-blocker".to_string()));
    };
    let rel = blocker.materialize(lang.domain.size);
    verify_ppdef(lang, ppdef, &rel, "blocker relation")?;
    if ppdef.free_count != 3 {
        return Err(ModelError::Verify("blocker pp-definition must have 3 free variables".into()));
    }
    let mut inst = CSPInstance::new(lang.domain.size);
    let mut provenance = BTreeMap::new();
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ids: Vec<usize> = nae.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        let var = inst.add_variable(format!("v{id}"), None).unwrap();
        provenance.insert(format!("v{id}"), inst.variables[var].clone());
        index.insert(id, var);
    }
    for (i, t) in nae.iter().enumerate() {
        let free: Vec<usize> = t.iter().map(|id| index[id]).collect();
        let fresh = instantiate_formula(&mut inst, lang, ppdef, &free, &format!("e{i}_"));
        for (j, &v) in fresh.iter().enumerate() {
            provenance.insert(format!("triple{i}/{j}"), inst.variables[v].clone());
        }
    }
    Ok(GadgetOutput { instance: inst, provenance })
}

/// Lemma 5.13 generator: builds the four-equation linear system
///
/// ```text
/// x₁+x₂ = x₃+c₀    x₃+c₀ = x₄+x₅    x₄+c₀ = x₁+x₆    x₅+x₆ = x₂+c₁
/// ```
///
/// over the blocker relation (summing the equations gives `0 = 1`, so
/// the instance is unsatisfiable, yet it is cycle-consistent and Solve
/// answers Ok). `c₀,c₁` are chosen as the lexicographically least pair
/// with `(c₀,c₁,c₀,c₁) ∈ R` and `(c₀,c₀,c₀,c₁) ∉ R`; the language must
/// contain the unary constant relations for both.
pub fn linear_counterexample(
    lang: &ConstraintLanguage,
    blocker: &Blocker,
    ppdef: &PPFormula,
) -> Result<CSPInstance> {
    let Blocker::P { s_set, .. } = blocker else {
        return Err(ModelError::Verify("the counterexample needs a p-blocker".to_string()));
    };
    let k = lang.domain.size;
    let rel = blocker.materialize(k);
    verify_ppdef(lang, ppdef, &rel, "p-blocker relation")?;
    if ppdef.free_count != 4 {
        return Err(ModelError::Verify("p-blocker pp-definition must have 4 free variables".into()));
    }
    let mut pair = None;
    'outer: for &c0 in s_set {
        for &c1 in s_set {
            if rel.contains(&[c0, c1, c0, c1]) && !rel.contains(&[c0, c0, c0, c1]) {
                pair = Some((c0, c1));
                break 'outer;
            }
        }
    }
    let Some((c0, c1)) = pair else {
        return Err(ModelError::Verify(
            "no constants c0, c1 with (c0,c1,c0,c1) in R and (c0,c0,c0,c1) not in R".to_string(),
        ));
    };
    let constant = |c: usize| -> Result<(String, Relation)> {
        let want = Relation::unary(k, [c]);
        lang.relations
            .iter()
            .find(|(_, r)| **r == want)
            .map(|(n, r)| (n.clone(), r.clone()))
            .ok_or_else(|| {
                ModelError::Verify(format!("language lacks the constant relation for {c}"))
            })
    };
    let mut inst = CSPInstance::new(k);
    let x: Vec<usize> = (1..=6)
        .map(|i| inst.add_variable(format!("x{i}"), None).unwrap())
        .collect();
    let z: Vec<usize> = (1..=4)
        .map(|i| inst.add_variable(format!("z{i}"), None).unwrap())
        .collect();
    for (i, &c) in [c0, c0, c0, c1].iter().enumerate() {
        let (name, r) = constant(c)?;
        inst.add_constraint(name, r, vec![z[i]]).unwrap();
    }
    // the four equations; each pair of blocks shares exactly one x-variable
    let equations: [[usize; 4]; 4] = [
        [x[0], x[1], x[2], z[0]],
        [x[2], z[1], x[3], x[4]],
        [x[3], z[2], x[0], x[5]],
        [x[4], x[5], x[1], z[3]],
    ];
    for (i, eq) in equations.iter().enumerate() {
        instantiate_formula(&mut inst, lang, ppdef, eq, &format!("w{i}_"));
    }
    Ok(inst)
}

/// Search caps for [`pp_definability_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PPSearchCaps {
    pub max_existential: usize,
    pub max_atoms: usize,
}

impl Default for PPSearchCaps {
    fn default() -> Self {
        PPSearchCaps { max_existential: 2, max_atoms: 3 }
    }
}

/// Outcome of the bounded pp-definability search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PPSearch {
    Found(PPFormula),
    /// Certified: this polymorphism of the language violates the target,
    /// so no pp-definition exists at all (Galois connection).
    Impossible(Operation),
    Unknown,
}

const PP_WITNESS_TABLE_LIMIT: u64 = 1 << 20;

/// Best-effort pp-definability: first scans low-arity polymorphisms of
/// the language for one violating the target (a certified negative),
/// then searches formulas breadth-first within the caps, comparing
/// evaluations against the target. `Unknown` when both phases exhaust.
pub fn pp_definability_search(
    lang: &ConstraintLanguage,
    target: &Relation,
    caps: PPSearchCaps,
) -> PPSearch {
    let k = lang.domain.size;
    assert_eq!(target.domain_size, k);
    if target == &Relation::equality(k) {
        return PPSearch::Found(PPFormula::new(2, 0, vec![Atom::Eq(0, 1)]));
    }
    // certified negatives: any polymorphism violating the target
    for arity in 1..=3usize {
        let cells = k.pow(arity as u32);
        let tables = match (k as u64).checked_pow(cells as u32) {
            Some(t) if t <= PP_WITNESS_TABLE_LIMIT => t,
            _ => break,
        };
        for code in 0..tables {
            let table: Vec<usize> = model::decode_args(code as usize, cells, k);
            let op = Operation::new("f", arity, k, table).unwrap();
            let is_poly = lang
                .relations
                .values()
                .all(|r| model::preserves(&op, r).unwrap().holds());
            if is_poly && !model::preserves(&op, target).unwrap().holds() {
                return PPSearch::Impossible(op);
            }
        }
    }
    // breadth-first formula search
    let free = target.arity;
    for e in 0..=caps.max_existential {
        let total = free + e;
        let mut candidates: Vec<Atom> = Vec::new();
        for (name, r) in &lang.relations {
            let count = total.pow(r.arity as u32);
            for idx in 0..count {
                let mut vars = Vec::with_capacity(r.arity);
                let mut rest = idx;
                for _ in 0..r.arity {
                    vars.push(rest % total);
                    rest /= total;
                }
                candidates.push(Atom::Rel { name: name.clone(), vars });
            }
        }
        for a in 0..total {
            for b in (a + 1)..total {
                candidates.push(Atom::Eq(a, b));
            }
        }
        let m = candidates.len();
        for count in 1..=caps.max_atoms.min(m) {
            // combinations of `count` atoms, indices strictly increasing
            let mut sel: Vec<usize> = (0..count).collect();
            loop {
                let atoms: Vec<Atom> = sel.iter().map(|&i| candidates[i].clone()).collect();
                let formula = PPFormula::new(free, e, atoms);
                if let Ok(result) = closure::eval_pp_formula(lang, &formula) {
                    if &result == target {
                        return PPSearch::Found(formula);
                    }
                }
                // advance to the next combination
                let mut pos = count;
                while pos > 0 && sel[pos - 1] == m - (count - pos) - 1 {
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                sel[pos - 1] += 1;
                for j in pos..count {
                    sel[j] = sel[j - 1] + 1;
                }
            }
        }
    }
    PPSearch::Unknown
}
