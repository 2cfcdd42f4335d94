//! Real semidefinite programs: construction from a relaxation, an embedded
//! interior-point solver, solution checks and SDPA export.

mod check;
mod facial;
mod realify;
mod reduce;
mod sdpa;
mod solver;

use nalgebra::DMatrix;

use crate::moment::Sense;
use crate::C64;

pub use check::{check_solution, SolutionReport};
pub use realify::{realify, Part, VarInfo};
pub use reduce::{reduce, ReducedSdp};
pub use sdpa::{export_sdpa, parse_sdpa, to_sdpa, SdpaEntry, SdpaProblem};
pub use solver::solve;

/// Sparse real row, sorted by column, no explicit zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow(pub Vec<(usize, f64)>);

impl SparseRow {
    pub fn from_terms(mut terms: Vec<(usize, f64)>) -> Self {
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => out.push((c, v)),
            }
        }
        out.retain(|t| t.1.abs() > 1e-14);
        Self(out)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, y: &[f64]) -> f64 {
        self.0.iter().map(|&(c, v)| v * y[c]).sum()
    }
}

/// Linear matrix inequality `Σ_k y_k H_k ⪰ 0` in real unknowns `y`, subject to
/// `E y = f`, optimising `objective · y + objective_constant`.
///
/// The `H_k` are Hermitian `dim × dim` matrices stored entry-wise: entry
/// `(a, b)` (flat index `a·dim + b`) holds the list of `(k, h_k[a,b])` in
/// `entry_var/entry_coef[entry_ptr[e]..entry_ptr[e+1]]`. The positivity
/// condition is understood on the real embedding of `Σ_k y_k H_k`, a real
/// symmetric matrix of side `2·dim`.
#[derive(Debug, Clone)]
pub struct RealSdp {
    pub dim: usize,
    pub vars: Vec<VarInfo>,
    pub entry_ptr: Vec<u32>,
    pub entry_var: Vec<u32>,
    pub entry_coef: Vec<C64>,
    pub eq_rows: Vec<SparseRow>,
    pub eq_rhs: Vec<f64>,
    pub objective: SparseRow,
    pub objective_constant: f64,
    pub sense: Sense,
    /// Sparse complex vectors `(index, coefficient)` that may lie in the kernel
    /// of every feasible matrix; the solver verifies each before using it.
    pub kernel_hints: Vec<Vec<(usize, C64)>>,
}

impl RealSdp {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Side of the real symmetric matrix variable.
    pub fn real_dim(&self) -> usize {
        2 * self.dim
    }

    pub fn entry_terms(&self, e: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (lo, hi) = (self.entry_ptr[e] as usize, self.entry_ptr[e + 1] as usize);
        self.entry_var[lo..hi].iter().zip(&self.entry_coef[lo..hi]).map(|(&k, &c)| (k as usize, c))
    }

    /// Hermitian matrix `Σ_k y_k H_k`.
    pub fn matrix(&self, y: &[f64]) -> DMatrix<C64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |a, b| self.entry_terms(a * n + b).map(|(k, h)| h * y[k]).sum::<C64>())
    }

    /// Real symmetric entries `(i, j, value)` with `i <= j` of the embedding of `H_k`.
    pub fn real_entries(&self, k: usize) -> Vec<(usize, usize, f64)> {
        let n = self.dim;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for (kk, h) in self.entry_terms(a * n + b) {
                    if kk == k {
                        push_embedded(&mut out, n, a, b, h);
                    }
                }
            }
        }
        out.sort_by_key(|t| (t.0, t.1));
        out
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.dot(y) + self.objective_constant
    }

    pub fn max_equality_residual(&self, y: &[f64]) -> f64 {
        self.eq_rows.iter().zip(&self.eq_rhs).map(|(r, &f)| (r.dot(y) - f).abs()).fold(0.0, f64::max)
    }
}

/// Appends the upper-triangle real-embedding entries of `h·E_ab` (Hermitian part
/// implied by the partner entry, so only `(a,b)` itself is expanded).
pub(crate) fn push_embedded(out: &mut Vec<(usize, usize, f64)>, n: usize, a: usize, b: usize, h: C64) {
    // [[Re, -Im], [Im, Re]]
    if h.re != 0.0 {
        if a <= b {
            out.push((a, b, h.re));
            out.push((n + a, n + b, h.re));
        }
    }
    if h.im != 0.0 {
        // lower-left block (n+a, b) = Im; its mirror (b, n+a) is upper.
        out.push((b, n + a, h.im));
    }
}

/// Real embedding `[[Re H, -Im H], [Im H, Re H]]`.
pub fn real_embedding(h: &DMatrix<C64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let v = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::MaxIterations => "max-iterations",
            Status::NumericalFailure => "numerical-failure",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target for relative gap and residuals.
    pub tol: f64,
    pub max_iters: usize,
    /// Largest accepted complex side `dim` (real side is twice this).
    pub dimension_cap: usize,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iters: 200, dimension_cap: 1500, verbose: false }
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub status: Status,
    /// Objective of the relaxation at the returned point (primal value).
    pub primal_value: f64,
    /// Certified-side bound from the dual: an upper bound when maximising,
    /// a lower bound when minimising.
    pub dual_bound: f64,
    /// Unknowns of the [`RealSdp`].
    pub y: Vec<f64>,
    /// Moment matrix `Σ y_k H_k`.
    pub solution: DMatrix<C64>,
    /// Largest absolute violation of the equality constraints and of positivity.
    pub residual: f64,
    /// Absolute duality gap.
    pub gap: f64,
    pub iterations: usize,
    /// Norm of the normalised Farkas certificate when infeasibility is detected.
    pub certificate_norm: Option<f64>,
}

impl SolverResult {
    /// The headline value: the dual bound, sound even at loose tolerance.
    pub fn value(&self) -> f64 {
        self.dual_bound
    }
}
