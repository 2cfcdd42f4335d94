//! Block moment matrix `G[(z,u),(z',v)] = <φ_z| u† v |φ_z'>` and its linear
//! constraints.
//!
//! Rows and columns are indexed by `(state z, basis word u)` with flat index
//! `z·m + u`. Entries whose keys `(z, z', canonical(u† v))` coincide are forced
//! equal; they share one scalar unknown (an equality class). Entries whose key
//! word vanishes belong to no class and are fixed to zero.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::opalg::{Alphabet, MonomialBasis, OpId, Word};
use crate::C64;

/// Flat `(row, col)` position in the moment matrix.
pub type Pos = (usize, usize);

/// Marker for entries fixed to zero.
pub const ZERO_CLASS: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassKey {
    pub z: usize,
    pub zp: usize,
    pub word: Word,
}

#[derive(Debug, Clone)]
pub struct EqualityClass {
    pub key: ClassKey,
    /// Entry positions in row-major order; the first is the representative.
    pub entries: Vec<Pos>,
    /// Class holding the Hermitian partners of these entries.
    pub conj: usize,
}

impl EqualityClass {
    pub fn rep(&self) -> Pos {
        self.entries[0]
    }

    pub fn is_self_conjugate(&self, id: usize) -> bool {
        self.conj == id
    }
}

/// Partition of all moment-matrix entries into equality classes.
#[derive(Debug, Clone)]
pub struct EqualityClassTable {
    pub n: usize,
    pub m: usize,
    class_of: Vec<u32>,
    classes: Vec<EqualityClass>,
    index: HashMap<ClassKey, usize>,
}

impl EqualityClassTable {
    /// Side length `n·m` of the moment matrix.
    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    pub fn flat(&self, z: usize, i: usize) -> usize {
        z * self.m + i
    }

    pub fn unflat(&self, k: usize) -> (usize, usize) {
        (k / self.m, k % self.m)
    }

    pub fn classes(&self) -> &[EqualityClass] {
        &self.classes
    }

    /// Class id at a position, or `None` for a zero entry.
    pub fn class_at(&self, pos: Pos) -> Option<usize> {
        let c = self.class_of[pos.0 * self.dim() + pos.1];
        (c != ZERO_CLASS).then_some(c as usize)
    }

    pub fn lookup(&self, key: &ClassKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn num_zero_entries(&self) -> usize {
        self.class_of.iter().filter(|&&c| c == ZERO_CLASS).count()
    }
}

/// Groups the entries of the `n·m` moment matrix by their key `(z, z', u† v)`.
pub fn build_structure(alphabet: &Alphabet, n: usize, basis: &MonomialBasis) -> EqualityClassTable {
    let m = basis.len();
    let dim = n * m;
    let mut products = vec![Word::Zero; m * m];
    for (i, u) in basis.words.iter().enumerate() {
        for (j, v) in basis.words.iter().enumerate() {
            products[i * m + j] = alphabet.adjoint_product(u, v);
        }
    }
    let mut class_of = vec![ZERO_CLASS; dim * dim];
    let mut classes: Vec<EqualityClass> = Vec::new();
    let mut index: HashMap<ClassKey, usize> = HashMap::new();
    for r in 0..dim {
        let (z, i) = (r / m, r % m);
        for c in 0..dim {
            let (zp, j) = (c / m, c % m);
            let word = &products[i * m + j];
            if word.is_zero() {
                continue;
            }
            let key = ClassKey { z, zp, word: word.clone() };
            let id = *index.entry(key.clone()).or_insert_with(|| {
                classes.push(EqualityClass { key, entries: Vec::new(), conj: usize::MAX });
                classes.len() - 1
            });
            classes[id].entries.push((r, c));
            class_of[r * dim + c] = id as u32;
        }
    }
    for id in 0..classes.len() {
        let (r, c) = classes[id].rep();
        classes[id].conj = class_of[c * dim + r] as usize;
    }
    EqualityClassTable { n, m, class_of, classes, index }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Gram,
    Completeness,
    Statistic,
}

impl ConstraintKind {
    fn tag(self) -> &'static str {
        match self {
            Self::Gram => "gram",
            Self::Completeness => "complete",
            Self::Statistic => "stat",
        }
    }
}

/// `Σ coeff · G[pos] = rhs` over class-representative positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub kind: ConstraintKind,
    pub terms: Vec<(Pos, C64)>,
    pub rhs: C64,
}

impl LinearConstraint {
    pub fn residual(&self, g: &DMatrix<C64>) -> C64 {
        self.terms.iter().map(|&(p, w)| w * g[p]).sum::<C64>() - self.rhs
    }
}

/// Complex-linear map `G ↦ Σ weight · G[pos] + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Functional {
    pub terms: Vec<(Pos, C64)>,
    pub constant: C64,
}

impl Functional {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == C64::new(0.0, 0.0)
    }

    pub fn eval(&self, g: &DMatrix<C64>) -> C64 {
        self.terms.iter().map(|&(p, w)| w * g[p]).sum::<C64>() + self.constant
    }

    pub fn scale(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self.constant *= s;
        self
    }

    pub fn add(mut self, other: &Functional) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self.normalised()
    }

    /// Constraint `self = rhs`.
    pub fn equals(&self, rhs: C64) -> LinearConstraint {
        LinearConstraint { kind: ConstraintKind::Statistic, terms: self.terms.clone(), rhs: rhs - self.constant }
    }

    /// Merges repeated positions and drops zero weights; terms sorted by position.
    fn normalised(mut self) -> Self {
        self.terms = merge_terms(std::mem::take(&mut self.terms));
        self
    }
}

fn merge_terms(mut terms: Vec<(Pos, C64)>) -> Vec<(Pos, C64)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(Pos, C64)> = Vec::with_capacity(terms.len());
    for (p, w) in terms {
        match out.last_mut() {
            Some(last) if last.0 == p => last.1 += w,
            _ => out.push((p, w)),
        }
    }
    out.retain(|t| t.1.norm() > 1e-14);
    out
}

/// One term of a statistic: `weight · <φ_z| word |φ_z'>`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatTerm {
    pub z: usize,
    pub zp: usize,
    pub word: Word,
    pub weight: C64,
}

impl StatTerm {
    pub fn new(z: usize, zp: usize, word: Word, weight: f64) -> Self {
        Self { z, zp, word, weight: C64::new(weight, 0.0) }
    }

    pub fn complex(z: usize, zp: usize, word: Word, weight: C64) -> Self {
        Self { z, zp, word, weight }
    }
}

/// Expresses a weighted sum of `<φ_z| w |φ_z'>` in moment-matrix entries.
pub fn statistic_functional(alphabet: &Alphabet, table: &EqualityClassTable, spec: &[StatTerm]) -> Result<Functional> {
    let mut terms = Vec::new();
    for t in spec {
        if t.weight.norm() == 0.0 {
            continue;
        }
        let word = alphabet.reduce(t.word.ops().to_vec());
        let word = if t.word.is_zero() { Word::Zero } else { word };
        if word.is_zero() {
            continue;
        }
        let key = ClassKey { z: t.z, zp: t.zp, word };
        let id = table.lookup(&key).ok_or_else(|| {
            Error::NotRepresentable(format!("<{}|{}|{}>", t.z, alphabet.format_word(&key.word), t.zp))
        })?;
        terms.push((table.classes()[id].rep(), t.weight));
    }
    Ok(Functional { terms, constant: C64::new(0.0, 0.0) }.normalised())
}

/// `G[(z,1),(z',1)] = λ[z][z']` for every pair of states.
pub fn gram_constraints(g: &GramMatrix, table: &EqualityClassTable) -> Result<Vec<LinearConstraint>> {
    if g.n() != table.n {
        return Err(Error::Dimension(format!("gram matrix has {} states, moment structure {}", g.n(), table.n)));
    }
    let mut out = Vec::new();
    for z in 0..table.n {
        for zp in 0..table.n {
            let key = ClassKey { z, zp, word: Word::identity() };
            let id = table.lookup(&key).expect("identity class always present");
            out.push(LinearConstraint {
                kind: ConstraintKind::Gram,
                terms: vec![(table.classes()[id].rep(), C64::new(1.0, 0.0))],
                rhs: g.get(z, zp),
            });
        }
    }
    Ok(out)
}

/// `Σ_a <φ_z| w E_a |φ_z'> = <φ_z| w |φ_z'>` for every class word `w` and every
/// measurement whose appended products all stay inside the moment matrix.
pub fn completeness_constraints(alphabet: &Alphabet, table: &EqualityClassTable) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<(Pos, (u64, u64))>> = HashSet::new();
    for class in table.classes() {
        let key = &class.key;
        'meas: for meas in alphabet.measurements() {
            let mut terms = vec![(class.rep(), C64::new(-1.0, 0.0))];
            for &op in &meas.outcomes {
                let prod = append(alphabet, &key.word, op);
                if prod.is_zero() {
                    continue;
                }
                let k = ClassKey { z: key.z, zp: key.zp, word: prod };
                match table.lookup(&k) {
                    Some(id) => terms.push((table.classes()[id].rep(), C64::new(1.0, 0.0))),
                    None => continue 'meas,
                }
            }
            let terms = merge_terms(terms);
            if terms.is_empty() {
                continue;
            }
            let sig = terms.iter().map(|&(p, w)| (p, (w.re.to_bits(), w.im.to_bits()))).collect();
            if seen.insert(sig) {
                out.push(LinearConstraint { kind: ConstraintKind::Completeness, terms, rhs: C64::new(0.0, 0.0) });
            }
        }
    }
    out
}

fn append(alphabet: &Alphabet, w: &Word, op: OpId) -> Word {
    let mut ops = w.ops().to_vec();
    ops.push(op);
    alphabet.reduce(ops)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Moment relaxation at one hierarchy level: structure, constraints, objective.
///
/// The objective is the real part of a [`Functional`]; constraints are complex
/// equalities.
#[derive(Debug, Clone)]
pub struct RelaxationProblem {
    pub gram: GramMatrix,
    pub alphabet: Alphabet,
    pub basis: MonomialBasis,
    pub table: EqualityClassTable,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Functional,
    pub sense: Sense,
}

/// Builds the full relaxation over the level-`level` basis.
pub fn assemble(
    gram: &GramMatrix,
    alphabet: &Alphabet,
    level: usize,
    extra: impl FnOnce(&EqualityClassTable) -> Result<(Vec<LinearConstraint>, Functional)>,
    sense: Sense,
) -> Result<RelaxationProblem> {
    let basis = alphabet.generate_level_capped(level, gram.n(), crate::opalg::DEFAULT_ROW_CAP)?;
    assemble_with_basis(gram, alphabet, basis, extra, sense)
}

/// As [`assemble`] with an explicitly chosen basis.
pub fn assemble_with_basis(
    gram: &GramMatrix,
    alphabet: &Alphabet,
    basis: MonomialBasis,
    extra: impl FnOnce(&EqualityClassTable) -> Result<(Vec<LinearConstraint>, Functional)>,
    sense: Sense,
) -> Result<RelaxationProblem> {
    let table = build_structure(alphabet, gram.n(), &basis);
    let mut constraints = gram_constraints(gram, &table)?;
    constraints.extend(completeness_constraints(alphabet, &table));
    let (stats, objective) = extra(&table)?;
    constraints.extend(stats);
    Ok(RelaxationProblem {
        gram: gram.clone(),
        alphabet: alphabet.clone(),
        basis,
        table,
        constraints,
        objective,
        sense,
    })
}

impl RelaxationProblem {
    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn level(&self) -> usize {
        self.basis.level
    }

    /// Builds the statistic functional against this problem's structure.
    pub fn functional(&self, spec: &[StatTerm]) -> Result<Functional> {
        statistic_functional(&self.alphabet, &self.table, spec)
    }

    /// Adds `functional = rhs`.
    pub fn add_constraint(&mut self, c: LinearConstraint) {
        self.constraints.push(c);
    }

    /// Vectors likely to lie in the kernel of every feasible moment matrix, as
    /// sparse `(flat index, coefficient)` lists.
    ///
    /// Two families are proposed: `e_(z,u) - Σ_a e_(z, E^a u)` and
    /// `e_(z,u) - Σ_a e_(z, u E^a)` for each state, basis word `u` and
    /// measurement whose products stay in the basis, and
    /// `Σ_z k_z e_(z,u)` for null vectors `k` of the Gram matrix. The solver
    /// keeps only those that vanish identically on the feasible affine set.
    pub fn kernel_candidates(&self) -> Vec<Vec<(usize, C64)>> {
        let mut out = Vec::new();
        let one = C64::new(1.0, 0.0);
        for (iu, u) in self.basis.words.iter().enumerate() {
            'meas: for (meas, left) in self.alphabet.measurements().iter().flat_map(|m| [(m, true), (m, false)]) {
                let mut rows = vec![iu];
                let mut used = Vec::new();
                for &op in &meas.outcomes {
                    let e = Word::Ops(vec![op]);
                    let prod = if left { self.alphabet.multiply(&e, u) } else { self.alphabet.multiply(u, &e) };
                    if prod.is_zero() {
                        continue;
                    }
                    match self.basis.index_of(&prod) {
                        Some(j) => used.push(j),
                        None => continue 'meas,
                    }
                }
                if used.len() == 1 && used[0] == iu {
                    continue;
                }
                rows.extend(used);
                for z in 0..self.table.n {
                    let mut v: Vec<(usize, C64)> = vec![(self.table.flat(z, rows[0]), one)];
                    v.extend(rows[1..].iter().map(|&j| (self.table.flat(z, j), -one)));
                    out.push(v);
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(self.gram.matrix().clone());
        for (k, &val) in eig.eigenvalues.iter().enumerate() {
            if val.abs() <= 1e-10 {
                let col = eig.eigenvectors.column(k);
                for i in 0..self.basis.len() {
                    out.push(
                        (0..self.table.n)
                            .map(|z| (self.table.flat(z, i), col[z]))
                            .filter(|t| t.1.norm() > 1e-14)
                            .collect(),
                    );
                }
            }
        }
        out
    }

    /// Largest violation of the class structure, zero entries and linear constraints.
    pub fn max_residual(&self, g: &DMatrix<C64>) -> f64 {
        let dim = self.dim();
        assert_eq!(g.nrows(), dim);
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let v = match self.table.class_at((r, c)) {
                    None => g[(r, c)].norm(),
                    Some(id) => (g[(r, c)] - g[self.table.classes()[id].rep()]).norm(),
                };
                worst = worst.max(v);
            }
        }
        for k in &self.constraints {
            worst = worst.max(k.residual(g).norm());
        }
        worst
    }

    /// Deterministic text dump of the structure, constraints and objective.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Maximize => "max",
            Sense::Minimize => "min",
        };
        let _ = writeln!(s, "relaxation n={} m={} level={} sense={}", self.table.n, self.table.m, self.level(), sense);
        let _ = writeln!(s, "basis");
        for (i, w) in self.basis.words.iter().enumerate() {
            let _ = writeln!(s, "  {i} {}", self.alphabet.format_word(w));
        }
        let _ = writeln!(s, "classes {} zero_entries {}", self.table.classes().len(), self.table.num_zero_entries());
        for (id, c) in self.table.classes().iter().enumerate() {
            let _ = writeln!(
                s,
                "  {id} <{}|{}|{}> rep=({},{}) size={} conj={}",
                c.key.z,
                self.alphabet.format_word(&c.key.word),
                c.key.zp,
                c.rep().0,
                c.rep().1,
                c.entries.len(),
                c.conj
            );
        }
        let _ = writeln!(s, "constraints {}", self.constraints.len());
        for k in &self.constraints {
            let _ = write!(s, "  {} rhs={} :", k.kind.tag(), fmt_c(k.rhs));
            for &(p, w) in &k.terms {
                let _ = write!(s, " {}@({},{})", fmt_c(w), p.0, p.1);
            }
            let _ = writeln!(s);
        }
        let _ = write!(s, "objective {} :", fmt_c(self.objective.constant));
        for &(p, w) in &self.objective.terms {
            let _ = write!(s, " {}@({},{})", fmt_c(w), p.0, p.1);
        }
        let _ = writeln!(s);
        s
    }
}

fn fmt_c(v: C64) -> String {
    format!("{:.12e}{:+.12e}i", v.re, v.im)
}
