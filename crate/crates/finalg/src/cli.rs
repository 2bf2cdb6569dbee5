//! Command-line front door.
//!
//! Thin wrappers over the library APIs: each subcommand parses its
//! input files, runs one pipeline, and emits a [`Report`] (human
//! readable by default, `--json` for machine output). Exit codes:
//! 0 = Ok/satisfiable, 1 = NoSolution/unsatisfiable, 2 = inconclusive,
//! 3 = input error.

use crate::closure::{self, ClosureBudget, SearchOutcome};
use crate::model::{
    self, Atom, ConstraintLanguage, PPFormula, Relation,
};
use crate::report::{exit, Report};
use crate::solver::{self, BruteOutcome, CSPInstance, SolveOutcome};
use crate::structure::{self, StrongSubuniverseOutcome};
use crate::transform;
use crate::wnu::{self, Blocker, WnuExistence};
use clap::{Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "finalg", version, about = "finite-algebra and CSP analysis toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit the report as JSON instead of human-readable text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Closure budget: maximum number of tuples any subpower closure
    /// may generate before reporting Inconclusive.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Seed for randomized corpus generation; recorded in the report.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Include wall-clock timing in the report (breaks byte-for-byte
    /// reproducibility, off by default).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full structural report on an algebra file: congruences, strong
    /// subuniverse, PC subuniverses, p-affineness, blockers, WNU terms.
    Analyze { algebra: PathBuf },
    /// WNU term existence for one arity (--arity), some prime arity
    /// (--some), or all arities at least 3 (--all).
    Wnu {
        algebra: PathBuf,
        #[arg(long)]
        arity: Option<usize>,
        #[arg(long)]
        some: bool,
        #[arg(long)]
        all: bool,
    },
    /// Run the cycle-consistency solver on an instance file.
    Solve {
        instance: PathBuf,
        /// Include the reduction trace in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Brute-force satisfiability oracle on an instance file.
    Brute { instance: PathBuf },
    /// Core reduction of a constraint language file.
    Core { language: PathBuf },
    /// NAE₃ hardness gadget: rewrite a NAE instance over the language
    /// via a pp-definition of its WNU-blocker.
    Gadget {
        language: PathBuf,
        /// pp-formula file defining the blocker relation.
        #[arg(long)]
        ppdef: PathBuf,
        /// NAE input file: one triple of variable ids per line.
        #[arg(long)]
        nae: PathBuf,
    },
    /// Generate the unsatisfiable-but-cycle-consistent linear instance
    /// over a language containing a p-blocker relation and constants.
    Counterexample { language: PathBuf },
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    run(Cli::parse())
}

/// Runs one parsed invocation and prints its report.
pub fn run(cli: Cli) -> i32 {
    let start = Instant::now();
    match execute(&cli) {
        Ok((mut report, code)) => {
            if let Some(seed) = cli.seed {
                report.input("seed", seed);
            }
            if cli.timing {
                report.timing_ms = Some(start.elapsed().as_millis() as u64);
            }
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{report}");
            }
            code
        }
        Err(message) => {
            eprintln!("error: {message}");
            exit::INPUT_ERROR
        }
    }
}

fn execute(cli: &Cli) -> Result<(Report, i32), String> {
    let budget = match cli.cap {
        Some(max_tuples) => ClosureBudget { max_tuples },
        None => ClosureBudget::default(),
    };
    match &cli.command {
        Command::Analyze { algebra } => cmd_analyze(algebra, budget),
        Command::Wnu { algebra, arity, some, all } => cmd_wnu(algebra, *arity, *some, *all),
        Command::Solve { instance, trace } => cmd_solve(instance, *trace),
        Command::Brute { instance } => cmd_brute(instance),
        Command::Core { language } => cmd_core(language),
        Command::Gadget { language, ppdef, nae } => cmd_gadget(language, ppdef, nae),
        Command::Counterexample { language } => cmd_counterexample(language),
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn err_str(e: model::ModelError) -> String {
    e.to_string()
}

fn cmd_analyze(path: &Path, budget: ClosureBudget) -> Result<(Report, i32), String> {
    let alg = model::parse_algebra(&read(path)?).map_err(err_str)?;
    let mut report = Report::new("analyze");
    report.input("algebra", path.display().to_string());
    report.result("size", alg.size());
    report.result("idempotent", alg.is_idempotent());

    let congruences = structure::congruences(&alg);
    report.result("congruence_count", congruences.len());
    report.result(
        "congruences",
        congruences.iter().map(|c| c.block_of.clone()).collect::<Vec<_>>(),
    );

    if alg.is_idempotent() && alg.size() >= 2 {
        match structure::find_strong_subuniverse(&alg, budget) {
            StrongSubuniverseOutcome::Witness(w) => {
                report.result("strong_subuniverse", &w);
            }
            StrongSubuniverseOutcome::Exhausted => {
                report.mark_inconclusive("find_strong_subuniverse");
            }
        }
        match structure::pc_subuniverses(&alg, budget) {
            Some(subs) => {
                report.result("pc_subuniverses", subs);
            }
            None => {
                report.mark_inconclusive("pc_subuniverses");
            }
        }
        match structure::is_p_affine(&alg, budget) {
            SearchOutcome::Found(w) => {
                report.result(
                    "p_affine",
                    serde_json::json!({ "p": w.p, "s": w.s, "phi": w.phi }),
                );
            }
            SearchOutcome::No => {
                report.result("p_affine", false);
            }
            SearchOutcome::Inconclusive => {
                report.mark_inconclusive("is_p_affine");
            }
        }
        report.result("wnu_blocker", wnu::find_wnu_blocker(&alg));
        report.result("p_wnu_blocker", wnu::find_p_wnu_blocker(&alg, None));
        report.result("has_wnu_some", wnu::has_wnu_some(&alg));
        report.result("has_wnu_all", wnu::has_wnu_all(&alg));
    } else {
        report.result(
            "structure_analysis",
            "skipped: needs an idempotent algebra with at least two elements",
        );
    }
    let code = if report.is_inconclusive() { exit::INCONCLUSIVE } else { exit::OK };
    Ok((report, code))
}

fn cmd_wnu(
    path: &Path,
    arity: Option<usize>,
    some: bool,
    all: bool,
) -> Result<(Report, i32), String> {
    let alg = model::parse_algebra(&read(path)?).map_err(err_str)?;
    if !alg.is_idempotent() {
        return Err("WNU analysis needs an idempotent algebra".to_string());
    }
    let modes = usize::from(arity.is_some()) + usize::from(some) + usize::from(all);
    if modes != 1 {
        return Err("pass exactly one of --arity N, --some, --all".to_string());
    }
    let mut report = Report::new("wnu");
    report.input("algebra", path.display().to_string());
    let exists = if let Some(n) = arity {
        if n < 3 {
            return Err("WNU arity must be at least 3".to_string());
        }
        report.input("arity", n);
        match wnu::has_wnu_of_arity(&alg, n) {
            WnuExistence::Exists => true,
            WnuExistence::Blocked(b) => {
                report.result("blocker", &b);
                false
            }
        }
    } else if some {
        report.input("mode", "some");
        let yes = wnu::has_wnu_some(&alg);
        if !yes {
            report.result("blocker", wnu::find_wnu_blocker(&alg));
        }
        yes
    } else {
        report.input("mode", "all");
        let yes = wnu::has_wnu_all(&alg);
        if !yes {
            let blocker = wnu::find_wnu_blocker(&alg)
                .or_else(|| wnu::find_p_wnu_blocker(&alg, None));
            report.result("blocker", blocker);
        }
        yes
    };
    report.result("exists", exists);
    Ok((report, if exists { exit::OK } else { exit::NO }))
}

fn load_instance(path: &Path) -> Result<(CSPInstance, ConstraintLanguage), String> {
    let text = read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    solver::parse_instance(&text, &|rel_path| {
        std::fs::read_to_string(base.join(rel_path))
    })
    .map_err(err_str)
}

fn cmd_solve(path: &Path, trace: bool) -> Result<(Report, i32), String> {
    let (inst, _) = load_instance(path)?;
    let mut report = Report::new("solve");
    report.input("instance", path.display().to_string());
    match solver::solve(&inst) {
        SolveOutcome::Ok { final_instance, trace: reductions } => {
            report.result("outcome", "ok");
            report.result("rounds", reductions.len());
            let domains: BTreeMap<&String, &Vec<usize>> = final_instance
                .variables
                .iter()
                .zip(&final_instance.domains)
                .collect();
            report.result("domains", domains);
            if trace {
                report.result("trace", &reductions);
            }
            Ok((report, exit::OK))
        }
        SolveOutcome::NoSolution => {
            report.result("outcome", "no_solution");
            Ok((report, exit::NO))
        }
    }
}

fn cmd_brute(path: &Path) -> Result<(Report, i32), String> {
    let (inst, _) = load_instance(path)?;
    let mut report = Report::new("brute");
    report.input("instance", path.display().to_string());
    match solver::brute_force_solve(&inst, solver::BRUTE_NODE_LIMIT) {
        BruteOutcome::Sat(assignment) => {
            report.result("outcome", "sat");
            let named: BTreeMap<&String, usize> =
                inst.variables.iter().zip(assignment).collect();
            report.result("assignment", named);
            Ok((report, exit::OK))
        }
        BruteOutcome::Unsat => {
            report.result("outcome", "unsat");
            Ok((report, exit::NO))
        }
        BruteOutcome::LimitExceeded => {
            report.mark_inconclusive("brute_force_solve");
            Ok((report, exit::INCONCLUSIVE))
        }
    }
}

fn cmd_core(path: &Path) -> Result<(Report, i32), String> {
    let lang = model::parse_language(&read(path)?).map_err(err_str)?;
    let core = transform::core_of(&lang);
    let mut report = Report::new("core");
    report.input("language", path.display().to_string());
    report.result("f", &core.f.table);
    report.result("range", &core.range);
    report.result("core_size", core.core.domain.size);
    report.result("core", &core.core);
    Ok((report, exit::OK))
}

fn cmd_gadget(
    lang_path: &Path,
    ppdef_path: &Path,
    nae_path: &Path,
) -> Result<(Report, i32), String> {
    let lang = model::parse_language(&read(lang_path)?).map_err(err_str)?;
    let formula = model::parse_pp_formula(&read(ppdef_path)?).map_err(err_str)?;
    formula.validate(&lang).map_err(err_str)?;
    let nae = transform::parse_nae(&read(nae_path)?).map_err(err_str)?;
    if formula.free_count != 3 {
        return Err("the blocker pp-definition must have 3 free variables".to_string());
    }
    let rel = closure::eval_pp_formula(&lang, &formula).map_err(err_str)?;
    let blocker = infer_wnu_blocker(&rel).ok_or_else(|| {
        "the pp-definition does not evaluate to a WNU-blocker relation".to_string()
    })?;
    let out = transform::nae_gadget(&lang, &blocker, &formula, &nae).map_err(err_str)?;
    let mut report = Report::new("gadget");
    report.input("language", lang_path.display().to_string());
    report.input("ppdef", ppdef_path.display().to_string());
    report.input("nae", nae_path.display().to_string());
    report.result("blocker", &blocker);
    report.result("instance", out.instance.format_instance());
    report.result("provenance", &out.provenance);
    Ok((report, exit::OK))
}

fn cmd_counterexample(path: &Path) -> Result<(Report, i32), String> {
    let lang = model::parse_language(&read(path)?).map_err(err_str)?;
    let found = lang
        .relations
        .iter()
        .filter(|(_, r)| r.arity == 4)
        .find_map(|(name, r)| infer_p_blocker(r).map(|b| (name.clone(), b)));
    let Some((rel_name, blocker)) = found else {
        return Err("no 4-ary p-blocker relation found in the language".to_string());
    };
    let ppdef = PPFormula::new(
        4,
        0,
        vec![Atom::Rel { name: rel_name.clone(), vars: vec![0, 1, 2, 3] }],
    );
    let inst = transform::linear_counterexample(&lang, &blocker, &ppdef).map_err(err_str)?;
    let mut report = Report::new("counterexample");
    report.input("language", path.display().to_string());
    report.result("blocker_relation", rel_name);
    report.result("blocker", &blocker);
    report.result("instance", inst.format_instance());
    // self-check: the generated instance is the Ok-but-unsatisfiable witness
    report.result(
        "solve",
        match solver::solve(&inst) {
            SolveOutcome::Ok { .. } => "ok",
            SolveOutcome::NoSolution => "no_solution",
        },
    );
    let mut code = exit::OK;
    match solver::brute_force_solve(&inst, 10_000_000) {
        BruteOutcome::Sat(_) => {
            report.result("brute", "sat");
        }
        BruteOutcome::Unsat => {
            report.result("brute", "unsat");
        }
        BruteOutcome::LimitExceeded => {
            report.mark_inconclusive("brute_force_solve");
            code = exit::INCONCLUSIVE;
        }
    }
    Ok((report, code))
}

/// Recovers the WNU-blocker `(B₀, B₁)` whose relation a pp-definition
/// evaluated to, by scanning ordered pairs of disjoint nonempty
/// subsets. Domains here are tiny; the scan is exhaustive.
fn infer_wnu_blocker(rel: &Relation) -> Option<Blocker> {
    if rel.arity != 3 {
        return None;
    }
    let k = rel.domain_size;
    for m0 in 1u32..(1 << k) {
        for m1 in 1u32..(1 << k) {
            if m0 & m1 != 0 {
                continue;
            }
            let bits = |m: u32| (0..k).filter(|&i| m >> i & 1 == 1).collect::<Vec<_>>();
            let blocker = Blocker::Wnu { b0: bits(m0), b1: bits(m1) };
            if &blocker.materialize(k) == rel {
                return Some(blocker);
            }
        }
    }
    None
}

/// Recovers a p-blocker matching the given 4-ary relation: `S` is the
/// set of values the relation mentions, `p^s = |S|`, and `φ` is found
/// by scanning bijections.
fn infer_p_blocker(rel: &Relation) -> Option<Blocker> {
    if rel.arity != 4 {
        return None;
    }
    let k = rel.domain_size;
    let mut s_set: Vec<usize> = rel.tuples().iter().flatten().copied().collect();
    s_set.sort_unstable();
    s_set.dedup();
    let n = s_set.len();
    let (p, s) = prime_power(n)?;
    let mut phi: Vec<usize> = (0..n).collect();
    loop {
        let blocker = Blocker::P { s_set: s_set.clone(), p, s, phi: phi.clone() };
        if &blocker.materialize(k) == rel {
            return Some(blocker);
        }
        if !next_permutation(&mut phi) {
            return None;
        }
    }
}

fn prime_power(n: usize) -> Option<(usize, usize)> {
    for p in 2..=n {
        if (2..p).any(|d| p % d == 0) {
            continue;
        }
        let (mut m, mut s) = (n, 0);
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

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}
