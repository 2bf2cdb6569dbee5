//! Domains, operations, relations, algebras and constraint languages,
//! together with the primitive relational algebra (projection, product,
//! intersection, composition) everything else is built from.
//!
//! Conventions fixed here and used everywhere, including file formats:
//!
//! * domain elements are the integers `0..k-1`;
//! * operation tables use the mixed-radix encoding of the argument
//!   tuple with the *first* coordinate most significant;
//! * relations keep their tuples canonically sorted and additionally
//!   carry a dense membership bitmap whenever `k^n <= 2^24`;
//! * empty relations are first-class values.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Maximum table size for which a dense membership index is kept.
const DENSE_INDEX_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("domain size mismatch: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },
    #[error("element {element} out of range for domain of size {size}")]
    OutOfRange { element: usize, size: usize },
    #[error("coordinate index {index} out of range for arity {arity}")]
    BadCoordinate { index: usize, arity: usize },
    #[error("expected a binary relation, got arity {0}")]
    NotBinary(usize),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("pp-formula variable index {index} out of range (free + existential = {limit})")]
    BadFormulaVariable { index: usize, limit: usize },
    #[error("search space of size {size} exceeds the limit {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error("the set {0:?} is not a subuniverse")]
    NotSubuniverse(Vec<usize>),
    #[error("the partition is not a congruence")]
    NotCongruence,
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, ModelError>;

fn parse_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}

/// A finite domain `{0, 1, ..., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Domain {
    pub size: usize,
}

impl Domain {
    pub fn new(size: usize) -> Self {
        assert!(size >= 1, "domain must have at least one element");
        Domain { size }
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.size
    }
}

/// A finite operation `A^m -> A` stored as a flat value table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    pub domain_size: usize,
    pub table: Vec<usize>,
}

/// Mixed-radix encoding of an argument tuple, first coordinate most
/// significant. This is the indexing scheme of every operation table.
pub fn encode_args(args: &[usize], k: usize) -> usize {
    let mut idx = 0;
    for &a in args {
        idx = idx * k + a;
    }
    idx
}

/// Inverse of [`encode_args`].
pub fn decode_args(mut idx: usize, arity: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
    out
}

impl Operation {
    pub fn new(name: impl Into<String>, arity: usize, domain_size: usize, table: Vec<usize>) -> Result<Self> {
        let expected = domain_size.checked_pow(arity as u32).expect("table size overflow");
        if table.len() != expected {
            return Err(ModelError::ArityMismatch {
                expected,
                got: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= domain_size) {
            return Err(ModelError::OutOfRange {
                element: bad,
                size: domain_size,
            });
        }
        Ok(Operation {
            name: name.into(),
            arity,
            domain_size,
            table,
        })
    }

    /// Builds an operation from a closure over argument tuples.
    pub fn from_fn(
        name: impl Into<String>,
        arity: usize,
        domain_size: usize,
        f: impl Fn(&[usize]) -> usize,
    ) -> Self {
        let size = domain_size.pow(arity as u32);
        let table = (0..size)
            .map(|idx| f(&decode_args(idx, arity, domain_size)))
            .collect();
        Operation::new(name, arity, domain_size, table).expect("from_fn produced a bad table")
    }

    pub fn eval(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[encode_args(args, self.domain_size)]
    }

    /// The `i`-th projection of the given arity.
    pub fn projection(arity: usize, coord: usize, domain_size: usize) -> Self {
        Operation::from_fn(format!("pr{}", coord + 1), arity, domain_size, |args| args[coord])
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.domain_size).all(|a| self.eval(&vec![a; self.arity]) == a)
    }
}

/// A finite relation: a set of `arity`-tuples over `0..domain_size-1`.
///
/// Tuples are kept sorted; a dense membership bitmap backs `contains`
/// when the table is small enough.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub arity: usize,
    pub domain_size: usize,
    tuples: Vec<Vec<usize>>,
    #[serde(skip)]
    dense: Option<Vec<bool>>,
}

impl Relation {
    pub fn new(arity: usize, domain_size: usize, mut tuples: Vec<Vec<usize>>) -> Result<Self> {
        for t in &tuples {
            if t.len() != arity {
                return Err(ModelError::ArityMismatch {
                    expected: arity,
                    got: t.len(),
                });
            }
            if let Some(&bad) = t.iter().find(|&&v| v >= domain_size) {
                return Err(ModelError::OutOfRange {
                    element: bad,
                    size: domain_size,
                });
            }
        }
        tuples.sort();
        tuples.dedup();
        let dense = Self::build_dense(arity, domain_size, &tuples);
        Ok(Relation {
            arity,
            domain_size,
            tuples,
            dense,
        })
    }

    fn build_dense(arity: usize, k: usize, tuples: &[Vec<usize>]) -> Option<Vec<bool>> {
        let size = (k as u64).checked_pow(arity as u32)?;
        if size > DENSE_INDEX_LIMIT {
            return None;
        }
        let mut dense = vec![false; size as usize];
        for t in tuples {
            dense[encode_args(t, k)] = true;
        }
        Some(dense)
    }

    pub fn empty(arity: usize, domain_size: usize) -> Self {
        Relation::new(arity, domain_size, Vec::new()).unwrap()
    }

    pub fn full(arity: usize, domain_size: usize) -> Self {
        let size = domain_size.pow(arity as u32);
        let tuples = (0..size).map(|i| decode_args(i, arity, domain_size)).collect();
        Relation::new(arity, domain_size, tuples).unwrap()
    }

    /// The binary equality relation on the domain.
    pub fn equality(domain_size: usize) -> Self {
        Relation::new(2, domain_size, (0..domain_size).map(|a| vec![a, a]).collect()).unwrap()
    }

    /// `{(a, a) | a in values}`.
    pub fn diagonal_of(domain_size: usize, values: impl IntoIterator<Item = usize>) -> Self {
        Relation::new(2, domain_size, values.into_iter().map(|a| vec![a, a]).collect()).unwrap()
    }

    /// A unary relation from a set of elements.
    pub fn unary(domain_size: usize, values: impl IntoIterator<Item = usize>) -> Self {
        Relation::new(1, domain_size, values.into_iter().map(|a| vec![a]).collect()).unwrap()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        match &self.dense {
            Some(dense) => dense[encode_args(tuple, self.domain_size)],
            None => self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok(),
        }
    }

    pub fn is_subset_of(&self, other: &Relation) -> bool {
        self.tuples.iter().all(|t| other.contains(t))
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation> {
        self.check_compatible(other)?;
        let tuples = self.tuples.iter().filter(|t| other.contains(t)).cloned().collect();
        Relation::new(self.arity, self.domain_size, tuples)
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.check_compatible(other)?;
        let mut tuples = self.tuples.clone();
        tuples.extend(other.tuples.iter().cloned());
        Relation::new(self.arity, self.domain_size, tuples)
    }

    /// Cartesian product, concatenating tuples.
    pub fn product(&self, other: &Relation) -> Result<Relation> {
        if self.domain_size != other.domain_size {
            return Err(ModelError::DomainMismatch {
                left: self.domain_size,
                right: other.domain_size,
            });
        }
        let mut tuples = Vec::with_capacity(self.len() * other.len());
        for a in &self.tuples {
            for b in &other.tuples {
                let mut t = a.clone();
                t.extend_from_slice(b);
                tuples.push(t);
            }
        }
        Relation::new(self.arity + other.arity, self.domain_size, tuples)
    }

    fn check_compatible(&self, other: &Relation) -> Result<()> {
        if self.domain_size != other.domain_size {
            return Err(ModelError::DomainMismatch {
                left: self.domain_size,
                right: other.domain_size,
            });
        }
        if self.arity != other.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (j, v) in t.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "}}")
    }
}

/// Applies `f` coordinatewise to `m` argument tuples of equal arity.
pub fn apply_op(f: &Operation, rows: &[&[usize]]) -> Result<Vec<usize>> {
    if rows.len() != f.arity {
        return Err(ModelError::ArityMismatch {
            expected: f.arity,
            got: rows.len(),
        });
    }
    let n = rows.first().map_or(0, |r| r.len());
    let mut args = vec![0; f.arity];
    let mut out = Vec::with_capacity(n);
    for row in rows {
        if row.len() != n {
            return Err(ModelError::ArityMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if let Some(&bad) = row.iter().find(|&&v| v >= f.domain_size) {
            return Err(ModelError::OutOfRange {
                element: bad,
                size: f.domain_size,
            });
        }
    }
    for coord in 0..n {
        for (slot, row) in args.iter_mut().zip(rows) {
            *slot = row[coord];
        }
        out.push(f.table[encode_args(&args, f.domain_size)]);
    }
    Ok(out)
}

/// Outcome of a preservation check: either the operation preserves the
/// relation, or a violating selection of rows is returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preservation {
    Holds,
    Violated { rows: Vec<Vec<usize>>, image: Vec<usize> },
}

impl Preservation {
    pub fn holds(&self) -> bool {
        matches!(self, Preservation::Holds)
    }
}

/// Checks whether `f` preserves `r`: every coordinatewise image of a
/// selection of `arity(f)` tuples from `r` stays in `r`.
pub fn preserves(f: &Operation, r: &Relation) -> Result<Preservation> {
    if f.domain_size != r.domain_size {
        return Err(ModelError::DomainMismatch {
            left: f.domain_size,
            right: r.domain_size,
        });
    }
    if r.is_empty() {
        return Ok(Preservation::Holds);
    }
    let m = f.arity;
    let mut selection = vec![0usize; m];
    loop {
        let rows: Vec<&[usize]> = selection.iter().map(|&i| r.tuples()[i].as_slice()).collect();
        let image = apply_op(f, &rows)?;
        if !r.contains(&image) {
            return Ok(Preservation::Violated {
                rows: rows.into_iter().map(|s| s.to_vec()).collect(),
                image,
            });
        }
        // odometer over selections
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(Preservation::Holds);
            }
            pos -= 1;
            selection[pos] += 1;
            if selection[pos] < r.len() {
                break;
            }
            selection[pos] = 0;
        }
    }
}

/// Projects `r` onto the listed coordinates, in the given order.
///
/// Repeated coordinates first filter to tuples whose repeated positions
/// agree, then project; `proj_{u,u}` therefore yields a diagonal.
pub fn relation_project(r: &Relation, coords: &[usize]) -> Result<Relation> {
    for &c in coords {
        if c >= r.arity {
            return Err(ModelError::BadCoordinate {
                index: c,
                arity: r.arity,
            });
        }
    }
    // positions of the first occurrence of each coordinate, for the
    // repeated-coordinate consistency filter
    let mut tuples = Vec::new();
    'outer: for t in r.tuples() {
        let mut seen: Vec<Option<usize>> = vec![None; r.arity];
        for &c in coords {
            match seen[c] {
                None => seen[c] = Some(t[c]),
                Some(v) if v == t[c] => {}
                Some(_) => continue 'outer,
            }
        }
        tuples.push(coords.iter().map(|&c| t[c]).collect());
    }
    Relation::new(coords.len(), r.domain_size, tuples)
}

/// Relational composition of two binary relations:
/// `(x, y)` such that `exists z: r(x, z) and s(z, y)`.
pub fn relation_compose(r: &Relation, s: &Relation) -> Result<Relation> {
    if r.arity != 2 {
        return Err(ModelError::NotBinary(r.arity));
    }
    if s.arity != 2 {
        return Err(ModelError::NotBinary(s.arity));
    }
    if r.domain_size != s.domain_size {
        return Err(ModelError::DomainMismatch {
            left: r.domain_size,
            right: s.domain_size,
        });
    }
    let k = r.domain_size;
    // bucket s by first coordinate
    let mut by_first: Vec<Vec<usize>> = vec![Vec::new(); k];
    for t in s.tuples() {
        by_first[t[0]].push(t[1]);
    }
    let mut tuples = Vec::new();
    for t in r.tuples() {
        for &y in &by_first[t[1]] {
            tuples.push(vec![t[0], y]);
        }
    }
    Relation::new(2, k, tuples)
}

/// A finite algebra: a domain plus a nonempty list of basic operations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Algebra {
    pub domain: Domain,
    pub ops: Vec<Operation>,
}

impl Algebra {
    pub fn new(domain: Domain, ops: Vec<Operation>) -> Result<Self> {
        assert!(!ops.is_empty(), "algebra needs at least one basic operation");
        for op in &ops {
            if op.domain_size != domain.size {
                return Err(ModelError::DomainMismatch {
                    left: domain.size,
                    right: op.domain_size,
                });
            }
        }
        Ok(Algebra { domain, ops })
    }

    pub fn size(&self) -> usize {
        self.domain.size
    }

    pub fn is_idempotent(&self) -> bool {
        self.ops.iter().all(|op| op.is_idempotent())
    }
}

/// A constraint language: a named collection of relations over one domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintLanguage {
    pub domain: Domain,
    pub relations: BTreeMap<String, Relation>,
}

impl ConstraintLanguage {
    pub fn new(domain: Domain, relations: impl IntoIterator<Item = (String, Relation)>) -> Result<Self> {
        let relations: BTreeMap<String, Relation> = relations.into_iter().collect();
        for rel in relations.values() {
            if rel.domain_size != domain.size {
                return Err(ModelError::DomainMismatch {
                    left: domain.size,
                    right: rel.domain_size,
                });
            }
        }
        Ok(ConstraintLanguage { domain, relations })
    }

    pub fn relation(&self, name: &str) -> Result<&Relation> {
        self.relations
            .get(name)
            .ok_or_else(|| ModelError::UnknownRelation(name.to_string()))
    }
}

/// An atom of a pp-formula. Equality is built in and needs no named
/// relation in the ambient language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Atom {
    Rel { name: String, vars: Vec<usize> },
    Eq(usize, usize),
}

/// A positive primitive formula: an existentially quantified
/// conjunction of atoms. Variables `0..free_count` are free; the next
/// `existential_count` are quantified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PPFormula {
    pub free_count: usize,
    pub existential_count: usize,
    pub atoms: Vec<Atom>,
}

impl PPFormula {
    pub fn new(free_count: usize, existential_count: usize, atoms: Vec<Atom>) -> Self {
        PPFormula {
            free_count,
            existential_count,
            atoms,
        }
    }

    pub fn var_count(&self) -> usize {
        self.free_count + self.existential_count
    }

    /// Checks variable ranges and that every named relation exists with
    /// the right arity.
    pub fn validate(&self, lang: &ConstraintLanguage) -> Result<()> {
        let limit = self.var_count();
        for atom in &self.atoms {
            match atom {
                Atom::Eq(a, b) => {
                    for &v in &[*a, *b] {
                        if v >= limit {
                            return Err(ModelError::BadFormulaVariable { index: v, limit });
                        }
                    }
                }
                Atom::Rel { name, vars } => {
                    let rel = lang.relation(name)?;
                    if vars.len() != rel.arity {
                        return Err(ModelError::ArityMismatch {
                            expected: rel.arity,
                            got: vars.len(),
                        });
                    }
                    for &v in vars {
                        if v >= limit {
                            return Err(ModelError::BadFormulaVariable { index: v, limit });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// file formats

/// Parses the line-oriented algebra file format:
///
/// ```text
/// domain <k>
/// operation <name> <arity>
/// <k^arity whitespace-separated integers>
/// end
/// ```
///
/// Comments start with `#`.
pub fn parse_algebra(input: &str) -> Result<Algebra> {
    let mut lines = numbered_lines(input);
    let (line_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty algebra file"))?;
    let k = parse_domain_line(line_no, &first)?;
    let mut ops = Vec::new();
    while let Some((line_no, line)) = lines.next() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("operation") => {
                let name = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "operation needs a name"))?
                    .to_string();
                let arity: usize = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "operation needs an arity"))?
                    .parse()
                    .map_err(|_| parse_err(line_no, "bad arity"))?;
                if arity == 0 {
                    return Err(parse_err(line_no, "operation arity must be positive"));
                }
                let expected = k.pow(arity as u32);
                let mut table = Vec::with_capacity(expected);
                let mut end_seen = false;
                for (ln, l) in lines.by_ref() {
                    if l.trim() == "end" {
                        end_seen = true;
                        break;
                    }
                    for tok in l.split_whitespace() {
                        let v: usize = tok
                            .parse()
                            .map_err(|_| parse_err(ln, format!("bad table entry {tok:?}")))?;
                        if v >= k {
                            return Err(parse_err(
                                ln,
                                format!("table entry {v} out of range for domain of size {k}"),
                            ));
                        }
                        table.push(v);
                    }
                }
                if !end_seen {
                    return Err(parse_err(line_no, "operation block not closed with `end`"));
                }
                if table.len() != expected {
                    return Err(parse_err(
                        line_no,
                        format!(
                            "operation {name} of arity {arity} needs {expected} entries, got {}",
                            table.len()
                        ),
                    ));
                }
                ops.push(Operation::new(name, arity, k, table)?);
            }
            Some(other) => {
                return Err(parse_err(line_no, format!("unexpected token {other:?}")));
            }
            None => {}
        }
    }
    if ops.is_empty() {
        return Err(parse_err(0, "algebra file declares no operations"));
    }
    Algebra::new(Domain::new(k), ops)
}

/// Parses the line-oriented language file format:
///
/// ```text
/// domain <k>
/// relation <name> <arity>
/// <one tuple per line>
/// end
/// ```
pub fn parse_language(input: &str) -> Result<ConstraintLanguage> {
    let mut lines = numbered_lines(input);
    let (line_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty language file"))?;
    let k = parse_domain_line(line_no, &first)?;
    let mut relations = Vec::new();
    while let Some((line_no, line)) = lines.next() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("relation") => {
                let name = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "relation needs a name"))?
                    .to_string();
                let arity: usize = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "relation needs an arity"))?
                    .parse()
                    .map_err(|_| parse_err(line_no, "bad arity"))?;
                if arity == 0 {
                    return Err(parse_err(line_no, "relation arity must be positive"));
                }
                let mut tuples = Vec::new();
                let mut end_seen = false;
                for (ln, l) in lines.by_ref() {
                    if l.trim() == "end" {
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
                        return Err(parse_err(
                            ln,
                            format!("tuple has {} entries, relation arity is {arity}", tuple.len()),
                        ));
                    }
                    if let Some(&bad) = tuple.iter().find(|&&v| v >= k) {
                        return Err(parse_err(
                            ln,
                            format!("tuple entry {bad} out of range for domain of size {k}"),
                        ));
                    }
                    tuples.push(tuple);
                }
                if !end_seen {
                    return Err(parse_err(line_no, "relation block not closed with `end`"));
                }
                if relations.iter().any(|(n, _)| n == &name) {
                    return Err(parse_err(line_no, format!("duplicate relation name {name:?}")));
                }
                relations.push((name.clone(), Relation::new(arity, k, tuples)?));
            }
            Some(other) => {
                return Err(parse_err(line_no, format!("unexpected token {other:?}")));
            }
            None => {}
        }
    }
    ConstraintLanguage::new(Domain::new(k), relations)
}

fn parse_domain_line(line_no: usize, line: &str) -> Result<usize> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next()) {
        (Some("domain"), Some(tok)) => {
            let k: usize = tok.parse().map_err(|_| parse_err(line_no, "bad domain size"))?;
            if k == 0 {
                return Err(parse_err(line_no, "domain size must be positive"));
            }
            Ok(k)
        }
        _ => Err(parse_err(line_no, "expected `domain <k>`")),
    }
}

/// Parses the pp-formula file format:
///
/// ```text
/// free 3                   # number of free variables
/// exists 1                 # optional, number of quantified variables
/// atom aff 0 1 2 3         # relation name, then variable indices
/// eq 0 1                   # equality atom
/// ```
///
/// Free variables are `0..free`, existential ones follow. `#` starts a
/// comment.
pub fn parse_pp_formula(input: &str) -> Result<PPFormula> {
    let mut lines = numbered_lines(input);
    let (line_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty formula file"))?;
    let mut parts = first.split_whitespace();
    let free: usize = match (parts.next(), parts.next(), parts.next()) {
        (Some("free"), Some(n), None) => n
            .parse()
            .map_err(|_| parse_err(line_no, "bad free-variable count"))?,
        _ => return Err(parse_err(line_no, "expected `free <n>`")),
    };
    let mut exists = 0usize;
    let mut atoms = Vec::new();
    for (line_no, line) in lines {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("exists") => {
                exists = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "bad existential count"))?;
            }
            Some("atom") => {
                let name = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "atom needs a relation name"))?
                    .to_string();
                let vars: Vec<usize> = parts
                    .map(|tok| {
                        tok.parse::<usize>()
                            .map_err(|_| parse_err(line_no, &format!("bad variable index {tok:?}")))
                    })
                    .collect::<Result<_>>()?;
                atoms.push(Atom::Rel { name, vars });
            }
            Some("eq") => {
                let mut idx = |what| {
                    parts
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| parse_err(line_no, what))
                };
                atoms.push(Atom::Eq(idx("eq needs two indices")?, idx("eq needs two indices")?));
            }
            Some(other) => {
                return Err(parse_err(line_no, &format!("unexpected token {other:?}")));
            }
            None => {}
        }
    }
    Ok(PPFormula::new(free, exists, atoms))
}

fn numbered_lines(input: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let stripped = match l.find('#') {
                Some(pos) => &l[..pos],
                None => l,
            };
            (i + 1, stripped.trim().to_string())
        })
        .filter(|(_, l)| !l.is_empty())
}


#[cfg(test)]
pub(crate) use tests::{bool_majority, bool_min, bool_xor3, nae3, r_aff};
