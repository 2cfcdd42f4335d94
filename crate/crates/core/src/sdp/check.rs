//! Independent verification of a candidate moment matrix.

use nalgebra::DMatrix;

use crate::gram::min_hermitian_eigenvalue;
use crate::{RelaxationProblem, C64};

/// Outcome of [`check_solution`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub tol: f64,
    /// Largest `|G[a,b] - conj(G[b,a])|`.
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    /// Largest violation of class identifications, zero entries and constraints.
    pub max_residual: f64,
    /// Objective evaluated directly on the matrix entries.
    pub objective: f64,
}

impl SolutionReport {
    pub fn passed(&self) -> bool {
        self.hermiticity_defect <= self.tol && self.min_eigenvalue >= -self.tol && self.max_residual <= self.tol
    }
}

impl std::fmt::Display for SolutionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (tol {:e}): hermiticity {:.3e}, min eigenvalue {:.3e}, residual {:.3e}, objective {:.12}",
            if self.passed() { "pass" } else { "fail" },
            self.tol,
            self.hermiticity_defect,
            self.min_eigenvalue,
            self.max_residual,
            self.objective
        )
    }
}

/// Checks that `g` is a feasible moment matrix of `p` up to `tol`.
///
/// # Panics
/// If `g` is not square of side `p.dim()`.
pub fn check_solution(p: &RelaxationProblem, g: &DMatrix<C64>, tol: f64) -> SolutionReport {
    let dim = p.dim();
    assert_eq!((g.nrows(), g.ncols()), (dim, dim), "matrix side does not match the relaxation");
    let mut hermiticity_defect = 0.0f64;
    for a in 0..dim {
        for b in a..dim {
            hermiticity_defect = hermiticity_defect.max((g[(a, b)] - g[(b, a)].conj()).norm());
        }
    }
    let objective = p.objective.terms.iter().map(|&(pos, w)| (w * g[pos]).re).sum::<f64>() + p.objective.constant.re;
    SolutionReport {
        tol,
        hermiticity_defect,
        min_eigenvalue: if dim == 0 { 0.0 } else { min_hermitian_eigenvalue(g) },
        max_residual: p.max_residual(g),
        objective,
    }
}
