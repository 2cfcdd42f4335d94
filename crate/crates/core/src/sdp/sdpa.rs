//! Sparse SDPA (`.dat-s`) files.
//!
//! The format describes `min cᵀx  s.t.  Σ_i x_i F_i - F_0 ⪰ 0` over symmetric
//! block-diagonal matrices. A [`RealSdp`] is written after equality
//! elimination (and facial reduction when it applies) as a single block: the
//! real embedding of `S(t) = F̃_0 + Σ_j t_j F̃_j`, so `F_i = F̃_i` and
//! `F_0 = -F̃_0`. Entries are written for `i <= j`, 1-based, sorted by
//! `(matno, block, i, j)`, with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::solver::presolve;
use super::{Part, RealSdp, SparseRow, VarInfo};
use crate::moment::Sense;
use crate::{Error, Result, C64};

const ENTRY_DROP: f64 = 1e-15;

/// One nonzero upper-triangle entry: `F_matno[block](i, j) = value`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpaEntry {
    pub matno: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Contents of an SDPA sparse file, plus how its optimum maps back to the
/// relaxation: `relaxation value = objective_sign · SDPA optimum + objective_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpaProblem {
    /// Negative sizes denote diagonal blocks.
    pub block_sizes: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
    pub objective_sign: f64,
    pub objective_offset: f64,
}

impl SdpaProblem {
    pub fn num_constraints(&self) -> usize {
        self.c.len()
    }

    pub fn relaxation_value(&self, sdpa_optimum: f64) -> f64 {
        self.objective_sign * sdpa_optimum + self.objective_offset
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.c.len());
        let _ = writeln!(s, "{}", self.block_sizes.len());
        let sizes: Vec<String> = self.block_sizes.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(s, "{}", sizes.join(" "));
        let c: Vec<String> = self.c.iter().map(|&v| fmt_value(v)).collect();
        let _ = writeln!(s, "{}", c.join(" "));
        for e in &self.entries {
            let _ = writeln!(s, "{} {} {} {} {}", e.matno, e.block, e.i, e.j, fmt_value(e.value));
        }
        s
    }

    /// The same program as a [`RealSdp`] in unknowns `x` plus one extra
    /// unknown fixed to 1 that carries `-F_0`; blocks are placed along the
    /// diagonal of one matrix.
    pub fn to_real_sdp(&self) -> Result<RealSdp> {
        let m = self.c.len();
        let mut offsets = Vec::with_capacity(self.block_sizes.len());
        let mut dim = 0usize;
        for &b in &self.block_sizes {
            offsets.push(dim);
            dim += b.unsigned_abs() as usize;
        }
        let mut cells: BTreeMap<(usize, usize), Vec<(usize, C64)>> = BTreeMap::new();
        for e in &self.entries {
            let (var, coef) = if e.matno == 0 { (m, -e.value) } else { (e.matno - 1, e.value) };
            let (a, b) = (offsets[e.block - 1] + e.i - 1, offsets[e.block - 1] + e.j - 1);
            cells.entry((a, b)).or_default().push((var, C64::new(coef, 0.0)));
            if a != b {
                cells.entry((b, a)).or_default().push((var, C64::new(coef, 0.0)));
            }
        }
        let mut entry_ptr = vec![0u32];
        let mut entry_var = Vec::new();
        let mut entry_coef = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                if let Some(terms) = cells.get(&(a, b)) {
                    for &(k, c) in terms {
                        entry_var.push(k as u32);
                        entry_coef.push(c);
                    }
                }
                entry_ptr.push(entry_var.len() as u32);
            }
        }
        Ok(RealSdp {
            dim,
            vars: (0..=m).map(|k| VarInfo { class: k, part: Part::Re }).collect(),
            entry_ptr,
            entry_var,
            entry_coef,
            eq_rows: vec![SparseRow(vec![(m, 1.0)])],
            eq_rhs: vec![1.0],
            objective: SparseRow::from_terms(self.c.iter().copied().enumerate().collect()),
            objective_constant: 0.0,
            sense: Sense::Minimize,
            kernel_hints: Vec::new(),
        })
    }
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Converts `s` to SDPA form; fails when its equalities are inconsistent.
pub fn to_sdpa(s: &RealSdp) -> Result<SdpaProblem> {
    let (inner, red) = presolve(s);
    if !red.is_consistent() {
        return Err(Error::Inconsistent(red.inconsistency));
    }
    let inner = inner.as_ref();
    let n = inner.dim;
    let mut cells: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    let mut add = |matno: usize, a: usize, b: usize, h: C64| {
        // upper triangle of [[Re, -Im], [Im, Re]] restricted to the (a, b) cell
        let mut put = |i: usize, j: usize, v: f64| {
            if v != 0.0 {
                *cells.entry((matno, i, j)).or_insert(0.0) += v;
            }
        };
        if a <= b {
            put(a, b, h.re);
            put(n + a, n + b, h.re);
        }
        put(b, n + a, h.im);
    };
    for a in 0..n {
        for b in 0..n {
            for (k, h) in inner.entry_terms(a * n + b) {
                add(0, a, b, -h * red.y0[k]);
                for &(j, v) in &red.basis[k].0 {
                    add(j + 1, a, b, h * v);
                }
            }
        }
    }
    let entries = cells
        .into_iter()
        .filter(|&(_, v)| v.abs() > ENTRY_DROP)
        .map(|((matno, i, j), value)| SdpaEntry { matno, block: 1, i: i + 1, j: j + 1, value })
        .collect();
    let sign = match inner.sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    Ok(SdpaProblem {
        block_sizes: if n == 0 { Vec::new() } else { vec![2 * n as i64] },
        c: red.objective.iter().map(|&v| if v.abs() > ENTRY_DROP { sign * v } else { 0.0 }).collect(),
        entries,
        objective_sign: sign,
        objective_offset: red.objective_constant,
    })
}

/// SDPA sparse text for `s`.
pub fn export_sdpa(s: &RealSdp) -> Result<String> {
    Ok(to_sdpa(s)?.to_text())
}

/// Reads an SDPA sparse file. Leading comment lines (starting with `"` or `*`)
/// and the separators `, ( ) { }` are accepted. The objective mapping is the
/// identity.
pub fn parse_sdpa(text: &str) -> Result<SdpaProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.replace([',', '(', ')', '{', '}'], " ")))
        .filter(|(_, l)| !l.trim().is_empty())
        .skip_while(|(_, l)| l.trim_start().starts_with(['"', '*']));
    let mut header = |what: &str| -> Result<(usize, String)> {
        lines.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
    };
    let (ln, l) = header("constraint count")?;
    let m: usize = first_token(ln, &l)?;
    let (ln, l) = header("block count")?;
    let nblocks: usize = first_token(ln, &l)?;
    let block_sizes = if nblocks == 0 {
        Vec::new()
    } else {
        let (ln, l) = header("block sizes")?;
        leading::<i64>(ln, &l, nblocks)?
    };
    let c = if m == 0 {
        Vec::new()
    } else {
        let (ln, l) = header("objective vector")?;
        leading::<f64>(ln, &l, m)?
    };
    let mut entries = Vec::new();
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 5 {
            return Err(Error::Parse { line: ln, msg: "expected `matno block i j value`".into() });
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse { line: ln, msg: e.to_string() });
        let (matno, block, i, j) = (int(t[0])?, int(t[1])?, int(t[2])?, int(t[3])?);
        let value: f64 =
            t[4].parse().map_err(|e: std::num::ParseFloatError| Error::Parse { line: ln, msg: e.to_string() })?;
        if matno > m || block == 0 || block > nblocks {
            return Err(Error::Parse { line: ln, msg: format!("matrix {matno} block {block} out of range") });
        }
        let size = block_sizes[block - 1].unsigned_abs() as usize;
        if i == 0 || j == 0 || i > size || j > size || (block_sizes[block - 1] < 0 && i != j) {
            return Err(Error::Parse { line: ln, msg: format!("index ({i}, {j}) outside block {block}") });
        }
        let (i, j) = (i.min(j), i.max(j));
        entries.push(SdpaEntry { matno, block, i, j, value });
    }
    Ok(SdpaProblem { block_sizes, c, entries, objective_sign: 1.0, objective_offset: 0.0 })
}

/// The first `count` tokens of a line.
fn leading<T: std::str::FromStr>(line: usize, l: &str, count: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let t: Vec<&str> = l.split_whitespace().take(count).collect();
    if t.len() < count {
        return Err(Error::Parse { line, msg: format!("expected {count} values, found {}", t.len()) });
    }
    t.iter().map(|t| t.parse::<T>().map_err(|e| Error::Parse { line, msg: format!("`{t}`: {e}") })).collect()
}

/// First token of a header line; SDPA allows trailing annotations such as `=mdim`.
fn first_token<T: std::str::FromStr>(line: usize, l: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let t = l.split_whitespace().next().ok_or_else(|| Error::Parse { line, msg: "empty line".into() })?;
    t.parse::<T>().map_err(|e| Error::Parse { line, msg: format!("`{t}`: {e}") })
}
