//! Words in commuting projective measurement operators.
//!
//! Each receiver ("party") owns a set of projective measurements. The rewriting
//! rules are: projectors are idempotent and self-adjoint, distinct outcomes of
//! one setting are orthogonal, and operators of different parties commute. An
//! outcome may be *aliased* across settings of a party (e.g. a shared no-click
//! operator), in which case all its occurrences denote one operator, orthogonal
//! to every other outcome of every setting it appears in.

use std::collections::HashSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on `basis size × state count`.
pub const DEFAULT_ROW_CAP: usize = 4000;

static NEXT_ALPHABET: AtomicU64 = AtomicU64::new(1);

/// Index of a distinct projector within an [`Alphabet`].
pub type OpId = u16;

/// A measurement-outcome symbol as declared, before alias resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol {
    alphabet: u64,
    index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Fresh,
    /// All outcomes of one party carrying the same alias name are one operator.
    Alias(String),
}

#[derive(Debug, Clone)]
struct SymbolInfo {
    party: usize,
    setting: usize,
    outcome: usize,
    op: OpId,
}

#[derive(Debug, Clone)]
struct OpInfo {
    party: usize,
    settings: Vec<usize>,
    label: String,
}

/// One (party, setting) measurement and its outcome operators, in outcome order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    pub party: usize,
    pub setting: usize,
    pub outcomes: Vec<OpId>,
}

#[derive(Debug, Default)]
pub struct AlphabetBuilder {
    decls: Vec<(usize, usize, Vec<Outcome>)>,
}

impl AlphabetBuilder {
    /// Declares measurement `setting` of `party` with the given outcomes.
    pub fn measurement(mut self, party: usize, setting: usize, outcomes: Vec<Outcome>) -> Self {
        self.decls.push((party, setting, outcomes));
        self
    }

    pub fn build(self) -> Result<Alphabet> {
        let mut decls = self.decls;
        decls.sort_by_key(|d| (d.0, d.1));
        for w in decls.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(Error::InvalidParameter(format!("setting {} of party {} declared twice", w[0].1, w[0].0)));
            }
        }
        let mut symbols = Vec::new();
        let mut ops: Vec<OpInfo> = Vec::new();
        let mut aliases: Vec<(usize, String, OpId)> = Vec::new();
        let mut measurements = Vec::new();
        for (party, setting, outcomes) in decls {
            if outcomes.is_empty() {
                return Err(Error::InvalidParameter(format!("setting {setting} of party {party} has no outcomes")));
            }
            let mut ids = Vec::with_capacity(outcomes.len());
            for (outcome, kind) in outcomes.into_iter().enumerate() {
                let op = match kind {
                    Outcome::Fresh => {
                        ops.push(OpInfo {
                            party,
                            settings: vec![setting],
                            label: format!("{}{}^{}", party_name(party), setting, outcome),
                        });
                        (ops.len() - 1) as OpId
                    }
                    Outcome::Alias(name) => match aliases.iter().find(|(p, n, _)| *p == party && *n == name) {
                        Some(&(_, _, id)) => {
                            let info = &mut ops[id as usize];
                            if info.settings.contains(&setting) {
                                return Err(Error::InvalidParameter(format!("alias {name} used twice in one setting")));
                            }
                            info.settings.push(setting);
                            id
                        }
                        None => {
                            ops.push(OpInfo {
                                party,
                                settings: vec![setting],
                                label: format!("{}^{}", party_name(party), name),
                            });
                            let id = (ops.len() - 1) as OpId;
                            aliases.push((party, name, id));
                            id
                        }
                    },
                };
                ids.push(op);
                symbols.push(SymbolInfo { party, setting, outcome, op });
            }
            measurements.push(Measurement { party, setting, outcomes: ids });
        }
        if ops.len() > OpId::MAX as usize {
            return Err(Error::InvalidParameter("too many operators".into()));
        }
        Ok(Alphabet { id: NEXT_ALPHABET.fetch_add(1, Ordering::Relaxed), symbols, ops, measurements })
    }
}

fn party_name(party: usize) -> String {
    match party {
        0..=25 => ((b'A' + party as u8) as char).to_string(),
        _ => format!("P{party}_"),
    }
}

/// A declared set of measurements for one or more parties.
#[derive(Debug, Clone)]
pub struct Alphabet {
    id: u64,
    symbols: Vec<SymbolInfo>,
    ops: Vec<OpInfo>,
    measurements: Vec<Measurement>,
}

/// A canonical operator word. `Ops(vec![])` is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Word {
    Zero,
    Ops(Vec<OpId>),
}

impl Word {
    pub fn identity() -> Self {
        Word::Ops(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Word::Zero)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Word::Ops(v) if v.is_empty())
    }

    /// Number of operators; zero for both identity and `Zero`.
    pub fn len(&self) -> usize {
        match self {
            Word::Zero => 0,
            Word::Ops(v) => v.len(),
        }
    }

    pub fn ops(&self) -> &[OpId] {
        match self {
            Word::Zero => &[],
            Word::Ops(v) => v,
        }
    }

    /// Graded order: shorter words first, then lexicographic by operator id.
    pub fn graded_cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.len(), self).cmp(&(other.len(), other))
    }
}

impl Alphabet {
    pub fn builder() -> AlphabetBuilder {
        AlphabetBuilder::default()
    }

    /// `parties` parties, each with `settings` measurements of `outcomes` outcomes.
    pub fn uniform(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        let mut b = Self::builder();
        for p in 0..parties {
            for s in 0..settings {
                b = b.measurement(p, s, vec![Outcome::Fresh; outcomes]);
            }
        }
        b.build()
    }

    /// A single receiver whose settings each have `outcomes` detected outcomes
    /// plus one shared no-click outcome (outcome index `outcomes`).
    pub fn single_receiver_with_no_click(settings: usize, outcomes: usize) -> Result<Self> {
        let mut b = Self::builder();
        for s in 0..settings {
            let mut o = vec![Outcome::Fresh; outcomes];
            o.push(Outcome::Alias("none".into()));
            b = b.measurement(0, s, o);
        }
        b.build()
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn party_of(&self, op: OpId) -> usize {
        self.ops[op as usize].party
    }

    pub fn label(&self, op: OpId) -> &str {
        &self.ops[op as usize].label
    }

    /// Symbol for `(party, setting, outcome)`, if declared.
    pub fn symbol(&self, party: usize, setting: usize, outcome: usize) -> Option<Symbol> {
        self.symbols
            .iter()
            .position(|s| s.party == party && s.setting == setting && s.outcome == outcome)
            .map(|index| Symbol { alphabet: self.id, index: index as u32 })
    }

    /// Operator for `(party, setting, outcome)`; panics if undeclared.
    pub fn op(&self, party: usize, setting: usize, outcome: usize) -> OpId {
        let s = self
            .symbol(party, setting, outcome)
            .unwrap_or_else(|| panic!("no symbol for party {party} setting {setting} outcome {outcome}"));
        self.symbols[s.index as usize].op
    }

    /// Single-operator word for `(party, setting, outcome)`.
    pub fn word(&self, party: usize, setting: usize, outcome: usize) -> Word {
        Word::Ops(vec![self.op(party, setting, outcome)])
    }

    fn orthogonal(&self, a: OpId, b: OpId) -> bool {
        let (x, y) = (&self.ops[a as usize], &self.ops[b as usize]);
        a != b && x.party == y.party && x.settings.iter().any(|s| y.settings.contains(s))
    }

    /// Canonical form of a product of declared symbols.
    pub fn canonicalize(&self, symbols: &[Symbol]) -> Result<Word> {
        if symbols.iter().any(|s| s.alphabet != self.id) {
            return Err(Error::MixedAlphabet);
        }
        let ops = symbols.iter().map(|s| self.symbols[s.index as usize].op).collect();
        Ok(self.reduce(ops))
    }

    /// Canonical form of a raw operator product.
    pub fn reduce(&self, mut ops: Vec<OpId>) -> Word {
        // parties commute; order within a party is kept
        ops.sort_by_key(|&o| self.ops[o as usize].party);
        let mut out: Vec<OpId> = Vec::with_capacity(ops.len());
        for o in ops {
            if let Some(&last) = out.last() {
                if last == o {
                    continue;
                }
                if self.orthogonal(last, o) {
                    return Word::Zero;
                }
            }
            out.push(o);
        }
        Word::Ops(out)
    }

    pub fn adjoint(&self, w: &Word) -> Word {
        match w {
            Word::Zero => Word::Zero,
            Word::Ops(v) => self.reduce(v.iter().rev().copied().collect()),
        }
    }

    pub fn multiply(&self, u: &Word, v: &Word) -> Word {
        match (u, v) {
            (Word::Ops(a), Word::Ops(b)) => {
                let mut ops = Vec::with_capacity(a.len() + b.len());
                ops.extend_from_slice(a);
                ops.extend_from_slice(b);
                self.reduce(ops)
            }
            _ => Word::Zero,
        }
    }

    /// Canonical `u† v`.
    pub fn adjoint_product(&self, u: &Word, v: &Word) -> Word {
        match (u, v) {
            (Word::Ops(a), Word::Ops(b)) => {
                let mut ops = Vec::with_capacity(a.len() + b.len());
                ops.extend(a.iter().rev());
                ops.extend_from_slice(b);
                self.reduce(ops)
            }
            _ => Word::Zero,
        }
    }

    /// All canonical nonzero words of length at most `level`, identity first.
    pub fn generate_level(&self, level: usize) -> Result<MonomialBasis> {
        self.generate_level_capped(level, 1, DEFAULT_ROW_CAP)
    }

    /// As [`Alphabet::generate_level`], failing once `words × states > cap`.
    pub fn generate_level_capped(&self, level: usize, states: usize, cap: usize) -> Result<MonomialBasis> {
        let mut all = vec![Word::identity()];
        let mut seen: HashSet<Word> = all.iter().cloned().collect();
        let mut frontier = all.clone();
        for len in 1..=level {
            let mut next = Vec::new();
            for w in &frontier {
                for op in 0..self.ops.len() as OpId {
                    let mut ops = w.ops().to_vec();
                    ops.push(op);
                    let c = self.reduce(ops);
                    if c.len() == len && seen.insert(c.clone()) {
                        next.push(c);
                    }
                }
            }
            if (all.len() + next.len()) * states.max(1) > cap {
                return Err(Error::CapExceeded { rows: (all.len() + next.len()) * states.max(1), cap });
            }
            next.sort();
            all.extend(next.iter().cloned());
            frontier = next;
        }
        if all.len() * states.max(1) > cap {
            return Err(Error::CapExceeded { rows: all.len() * states.max(1), cap });
        }
        Ok(MonomialBasis { level, words: all })
    }

    pub fn format_word(&self, w: &Word) -> String {
        match w {
            Word::Zero => "0".into(),
            Word::Ops(v) if v.is_empty() => "1".into(),
            Word::Ops(v) => v.iter().map(|&o| self.label(o)).collect::<Vec<_>>().join(" "),
        }
    }
}

/// Ordered, duplicate-free list of canonical words; identity at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    pub level: usize,
    pub words: Vec<Word>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.words.iter().position(|x| x == w)
    }

    /// Basis made of explicitly chosen words (identity is prepended if missing).
    pub fn from_words(words: Vec<Word>) -> Self {
        let mut out = vec![Word::identity()];
        for w in words {
            if !w.is_zero() && !out.contains(&w) {
                out.push(w);
            }
        }
        let level = out.iter().map(Word::len).max().unwrap_or(0);
        Self { level, words: out }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Word::Zero => write!(f, "0"),
            Word::Ops(v) if v.is_empty() => write!(f, "1"),
            Word::Ops(v) => {
                let s: Vec<String> = v.iter().map(|o| format!("#{o}")).collect();
                write!(f, "{}", s.join("."))
            }
        }
    }
}
