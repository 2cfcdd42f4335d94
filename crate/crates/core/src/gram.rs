//! Gram matrices of pure code-state families.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Absolute tolerance for Hermiticity, unit diagonal and positivity.
pub const GRAM_TOL: f64 = 1e-10;

/// Overlap matrix `λ[z][z'] = <ψ_z|ψ_z'>` of a family of normalised pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<C64>,
}

impl GramMatrix {
    /// Wraps a matrix after checking it is a valid Gram matrix.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!(
                "gram matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let report = validate_gram(&entries);
        if !report.passed() {
            return Err(Error::InvalidParameter(format!("not a gram matrix: {report}")));
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, z: usize, zp: usize) -> C64 {
        self.entries[(z, zp)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

/// Diagnostics produced by [`validate_gram`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramReport {
    /// max |λ_zz' - conj(λ_z'z)|
    pub hermiticity_defect: f64,
    /// max |λ_zz - 1|
    pub diagonal_defect: f64,
    pub min_eigenvalue: f64,
}

impl GramReport {
    pub fn passed(&self) -> bool {
        self.hermiticity_defect <= GRAM_TOL && self.diagonal_defect <= GRAM_TOL && self.min_eigenvalue >= -GRAM_TOL
    }
}

impl std::fmt::Display for GramReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hermiticity defect {:.3e}, diagonal defect {:.3e}, min eigenvalue {:.3e}",
            self.hermiticity_defect, self.diagonal_defect, self.min_eigenvalue
        )
    }
}

/// Reports how far a square matrix is from being a Gram matrix of unit vectors.
pub fn validate_gram(g: &DMatrix<C64>) -> GramReport {
    assert!(g.is_square(), "validate_gram needs a square matrix");
    let n = g.nrows();
    let mut herm = 0.0f64;
    let mut diag = 0.0f64;
    for i in 0..n {
        diag = diag.max((g[(i, i)] - C64::new(1.0, 0.0)).norm());
        for j in 0..n {
            herm = herm.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
    }
    let min_eigenvalue = if n == 0 { 0.0 } else { min_hermitian_eigenvalue(g) };
    GramReport { hermiticity_defect: herm, diagonal_defect: diag, min_eigenvalue }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `<a|b>` for coherent states `|a>`, `|b>`.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (-(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b).exp()
}

/// Gram matrix of explicit state vectors.
pub fn gram_from_vectors(vectors: &[DVector<C64>]) -> Result<GramMatrix> {
    let Some(first) = vectors.first() else {
        return Err(Error::Dimension("no state vectors".into()));
    };
    let dim = first.len();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Dimension(format!("vector {index} has dimension {}, expected {dim}", v.len())));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > GRAM_TOL {
            return Err(Error::NotNormalised { index, norm });
        }
    }
    let n = vectors.len();
    let g = DMatrix::from_fn(n, n, |i, j| vectors[i].dotc(&vectors[j]));
    GramMatrix::new(g)
}

/// Gram matrix of multimode coherent states; `modes[z][k]` is the amplitude of
/// mode `k` in state `z`.
pub fn gram_from_modes(modes: &[Vec<C64>]) -> Result<GramMatrix> {
    let Some(first) = modes.first() else {
        return Err(Error::Dimension("no coherent states".into()));
    };
    let k = first.len();
    if let Some(bad) = modes.iter().position(|m| m.len() != k) {
        return Err(Error::Dimension(format!("state {bad} has {} modes, expected {k}", modes[bad].len())));
    }
    let n = modes.len();
    let g = DMatrix::from_fn(n, n, |i, j| {
        modes[i].iter().zip(&modes[j]).map(|(&a, &b)| coherent_overlap(a, b)).product::<C64>()
    });
    GramMatrix::new(g)
}

/// Phase-encoded states `|√μ>, |-√μ>, |i√μ>, |-i√μ>` in that order.
pub fn gram_phase_qkd(mu: f64) -> Result<GramMatrix> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mean photon number {mu} must be >= 0")));
    }
    gram_from_modes(&phase_qkd_amplitudes(mu))
}

pub(crate) fn phase_qkd_amplitudes(mu: f64) -> Vec<Vec<C64>> {
    let s = mu.sqrt();
    [C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, s), C64::new(0.0, -s)].into_iter().map(|a| vec![a]).collect()
}

/// Two-mode time-bin states `bit 0, bit 1, test` with finite extinction `delta`.
///
/// The test sequence `|β>|β>` is not distorted by the extinction ratio.
pub fn gram_cow(alpha: C64, beta: C64, delta: f64) -> Result<GramMatrix> {
    gram_from_modes(&cow_amplitudes(alpha, beta, delta)?)
}

pub(crate) fn cow_amplitudes(alpha: C64, beta: C64, delta: f64) -> Result<Vec<Vec<C64>>> {
    if alpha.norm() <= 0.0 {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("extinction {delta} outside [0, 1)")));
    }
    let off = alpha * delta.sqrt();
    let on = alpha * (1.0 - delta).sqrt();
    Ok(vec![vec![off, on], vec![on, off], vec![beta, beta]])
}

/// How the code states are described.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamilySpec {
    ExplicitVectors(Vec<DVector<C64>>),
    CoherentModes(Vec<Vec<C64>>),
    DirectGram(DMatrix<C64>),
}

impl StateFamilySpec {
    pub fn gram(&self) -> Result<GramMatrix> {
        match self {
            Self::ExplicitVectors(v) => gram_from_vectors(v),
            Self::CoherentModes(m) => gram_from_modes(m),
            Self::DirectGram(g) => GramMatrix::new(g.clone()),
        }
    }
}

/// Conjugate-coding states for the two-bit QRAC, indexed by `z = 2·z0 + z1`:
/// `|ψ00> = |+>`, `|ψ01> = |-i>`, `|ψ10> = -|+i>`, `|ψ11> = -|->`.
///
/// The global phases are chosen so that the Gram matrix has the usual
/// published form with `λ[0][1] = (1 - i)/2`; phases do not affect the
/// achievable statistics.
pub fn conjugate_coding_vectors() -> Vec<DVector<C64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    vec![
        DVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]),
        DVector::from_vec(vec![c(h, 0.0), c(0.0, -h)]),
        DVector::from_vec(vec![c(-h, 0.0), c(0.0, -h)]),
        DVector::from_vec(vec![c(-h, 0.0), c(h, 0.0)]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn vacuum_and_identical_overlaps() {
        assert_eq!(coherent_overlap(c(0.0, 0.0), c(0.0, 0.0)), c(1.0, 0.0));
        let a = c(0.3, -1.2);
        assert!((coherent_overlap(a, a) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn opposite_phase_overlap() {
        let v = coherent_overlap(c(0.5, 0.0), c(-0.5, 0.0));
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v.re - 0.606531).abs() < 1e-6);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn conjugate_coding_gram_matches_displayed_matrix() {
        let g = gram_from_vectors(&conjugate_coding_vectors()).unwrap();
        let expect = [
            [c(1.0, 0.0), c(0.5, -0.5), c(-0.5, -0.5), c(0.0, 0.0)],
            [c(0.5, 0.5), c(1.0, 0.0), c(0.0, 0.0), c(-0.5, 0.5)],
            [c(-0.5, 0.5), c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.5)],
            [c(0.0, 0.0), c(-0.5, -0.5), c(0.5, -0.5), c(1.0, 0.0)],
        ];
        for i in 0..4 {
            for j in 0..4 {
                let got = g.get(i, j);
                assert!((got - expect[i][j]).norm() < 1e-12, "({i},{j}) {got} vs {}", expect[i][j]);
            }
        }
        assert!(validate_gram(g.matrix()).passed());
    }

    #[test]
    fn orthonormal_and_single_vectors() {
        let e = |k: usize| DVector::from_fn(3, |i, _| if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let g = gram_from_vectors(&[e(0), e(1), e(2)]).unwrap();
        assert_eq!(g.matrix(), &DMatrix::identity(3, 3));
        let g1 = gram_from_vectors(&[e(1)]).unwrap();
        assert_eq!(g1.n(), 1);
        assert_eq!(g1.get(0, 0), c(1.0, 0.0));
    }

    #[test]
    fn vector_errors() {
        let a = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let b = DVector::from_vec(vec![c(1.0, 0.0)]);
        assert!(matches!(gram_from_vectors(&[a.clone(), b]), Err(Error::Dimension(_))));
        let unnorm = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(gram_from_vectors(&[a, unnorm]), Err(Error::NotNormalised { index: 1, .. })));
    }

    #[test]
    fn phase_qkd_gram() {
        let g0 = gram_phase_qkd(0.0).unwrap();
        assert!(g0.matrix().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
        let g = gram_phase_qkd(0.25).unwrap();
        assert!((g.get(0, 1).re - 0.606531).abs() < 1e-6);
        let l13 = c(-0.25, 0.25).exp();
        assert!((g.get(0, 2) - l13).norm() < 1e-14);
        assert!((g.get(0, 2).norm() - 0.778801).abs() < 1e-6);
        assert!(gram_phase_qkd(-0.1).is_err());
    }

    #[test]
    fn phase_qkd_moduli_are_powers() {
        let mu = 0.37;
        let g = gram_phase_qkd(mu).unwrap();
        let amps = phase_qkd_amplitudes(mu);
        for i in 0..4 {
            for j in 0..4 {
                let m = g.get(i, j).norm();
                let ok = [0.0, 1.0, 2.0].iter().any(|d| (m - (-mu * d).exp()).abs() < 1e-14);
                assert!(ok);
                let direct = coherent_overlap(amps[i][0], amps[j][0]);
                assert!((g.get(i, j) - direct).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cow_gram() {
        let alpha = c(0.5, 0.0);
        let g = gram_cow(alpha, alpha, 0.0).unwrap();
        // two modes, each contributing exp(-|α|²/2)
        let oracle = coherent_overlap(c(0.0, 0.0), alpha) * coherent_overlap(alpha, c(0.0, 0.0));
        assert!((g.get(0, 1) - oracle).norm() < 1e-15);
        assert!((g.get(0, 1).re - (-0.25f64).exp()).abs() < 1e-12);
        for i in 0..3 {
            assert!((g.get(i, i) - c(1.0, 0.0)).norm() < 1e-14);
        }
        // test state with β = 0 is vacuum: overlap with bit 0 is the vacuum overlap of |α> alone
        let g = gram_cow(alpha, c(0.0, 0.0), 0.0).unwrap();
        let oracle = coherent_overlap(c(0.0, 0.0), c(0.0, 0.0)) * coherent_overlap(c(0.0, 0.0), alpha);
        assert!((g.get(2, 0) - oracle).norm() < 1e-15);
        assert!((g.get(2, 0).re - (-0.125f64).exp()).abs() < 1e-14);
        assert!(gram_cow(alpha, alpha, 1.0).is_err());
        assert!(gram_cow(c(0.0, 0.0), alpha, 0.1).is_err());
    }

    #[test]
    fn validation_reports() {
        assert!(validate_gram(&DMatrix::identity(3, 3)).passed());
        let mut m: DMatrix<C64> = DMatrix::identity(2, 2);
        m[(0, 1)] = c(2.0, 0.0);
        m[(1, 0)] = c(2.0, 0.0);
        let r = validate_gram(&m);
        assert!(!r.passed());
        assert!(r.min_eigenvalue < -0.5);
        assert!(GramMatrix::new(m).is_err());
    }
}
