//! Phase-encoded coherent-state key distribution.
//!
//! Four states `|α_z>` with `α = (√μ, -√μ, i√μ, -i√μ)`: states 0 and 1 carry
//! the key (setting 0), states 2 and 3 test the conjugate basis (setting 1).
//! Bob's outcomes are 0, 1 and a no-click outcome shared by both settings.
//! The phase error rate is maximised over the relaxation with the observed
//! detection and error rates held fixed.

use crate::gram::gram_phase_qkd;
use crate::moment::{assemble, statistic_functional, Sense, StatTerm};
use crate::opalg::Alphabet;
use crate::physics::phase_qkd_honest_stats;
use crate::sdp::{realify, solve};
use crate::{Error, Functional, RelaxationProblem, Result, SolverOptions, Status, C64};

use super::keyrate::{keyrate, KeyRateResult};

/// Outcome index of the shared no-click operator.
pub const NO_CLICK: usize = 2;

/// Transmittance of a channel with `loss_db` decibels of loss.
pub fn transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// How the no-click probability enters the relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectionConstraint {
    /// `<φ_z|B^∅|φ_z> = 1 - p_det` for every state.
    #[default]
    PerState,
    /// The mean over states equals `1 - p_det`.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseQkdConfig {
    pub mu: f64,
    pub loss_db: f64,
    pub p_dc: f64,
    pub e_opt: f64,
    pub level: usize,
    pub detection: DetectionConstraint,
}

impl PhaseQkdConfig {
    pub fn new(mu: f64, loss_db: f64, p_dc: f64, e_opt: f64, level: usize) -> Self {
        Self { mu, loss_db, p_dc, e_opt, level, detection: DetectionConstraint::PerState }
    }

    pub fn eta(&self) -> f64 {
        transmittance(self.loss_db)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("loss_db", self.loss_db), ("p_dc", self.p_dc), ("e_opt", self.e_opt)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} {v} must be finite and non-negative")));
            }
        }
        if self.level == 0 {
            return Err(Error::InvalidParameter("level must be at least 1".into()));
        }
        Ok(())
    }

    /// `(p_det, ε)` of the honest devices.
    pub fn honest_stats(&self) -> Result<(f64, f64)> {
        self.validate()?;
        phase_qkd_honest_stats(self.mu, self.eta(), self.p_dc, self.e_opt)
    }
}

/// Terms of `<Φ| Σ_k |v_k><v_k| ⊗ B^{err_k}_setting |Φ>` for the purification
/// `|Φ> = (|+>|φ_{z0}> + |->|φ_{z1}>)/√2`.
///
/// `virtual_basis[k]` are Alice's virtual measurement vectors in the
/// computational basis and `error_outcome[k]` the outcome counted as an error
/// when she obtains `k`.
pub fn purified_error_terms(
    alphabet: &Alphabet,
    states: [usize; 2],
    setting: usize,
    virtual_basis: [[C64; 2]; 2],
    error_outcome: [usize; 2],
) -> Vec<StatTerm> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let key = [[C64::new(r, 0.0), C64::new(r, 0.0)], [C64::new(r, 0.0), C64::new(-r, 0.0)]];
    let inner = |a: &[C64; 2], b: &[C64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
    let mut out = Vec::new();
    for (v, &err) in virtual_basis.iter().zip(&error_outcome) {
        let word = alphabet.word(0, setting, err);
        for (i, &z) in states.iter().enumerate() {
            for (j, &zp) in states.iter().enumerate() {
                let weight = inner(&key[i], v) * inner(v, &key[j]) * 0.5;
                out.push(StatTerm::complex(z, zp, word.clone(), weight));
            }
        }
    }
    out
}

/// Phase errors of the key states 0 and 1 against test setting 1:
/// Alice's virtual `|+i>` counts outcome 0 as an error and `|-i>` outcome 1.
pub fn phase_error_terms(alphabet: &Alphabet) -> Vec<StatTerm> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus_i = [C64::new(r, 0.0), C64::new(0.0, r)];
    let minus_i = [C64::new(r, 0.0), C64::new(0.0, -r)];
    purified_error_terms(alphabet, [0, 1], 1, [plus_i, minus_i], [0, 1])
}

/// `ε_ph · p_det` as a functional over a relaxation of [`qkd_alphabet`].
pub fn phase_error_functional(p: &RelaxationProblem) -> Result<Functional> {
    p.functional(&phase_error_terms(&p.alphabet))
}

/// Bob's alphabet: two settings, outcomes 0, 1 and the shared no-click outcome.
pub fn qkd_alphabet() -> Result<Alphabet> {
    Alphabet::single_receiver_with_no_click(2, 2)
}

/// Relaxation maximising `ε_ph · p_det` at the honest statistics of `cfg`.
pub fn build_phase_qkd(cfg: &PhaseQkdConfig) -> Result<RelaxationProblem> {
    let (p_det, eps) = cfg.honest_stats()?;
    build_phase_qkd_with(cfg, p_det, eps, eps)
}

/// As [`build_phase_qkd`] with explicit detection and error rates.
pub fn build_phase_qkd_with(cfg: &PhaseQkdConfig, p_det: f64, eps0: f64, eps1: f64) -> Result<RelaxationProblem> {
    cfg.validate()?;
    let alphabet = qkd_alphabet()?;
    let gram = gram_phase_qkd(cfg.mu)?;
    assemble(
        &gram,
        &alphabet,
        cfg.level,
        |table| {
            let f = |terms: Vec<StatTerm>| statistic_functional(&alphabet, table, &terms);
            let none = |z: usize| StatTerm::new(z, z, alphabet.word(0, 0, NO_CLICK), 1.0);
            let mut constraints = Vec::new();
            match cfg.detection {
                DetectionConstraint::PerState => {
                    for z in 0..4 {
                        constraints.push(f(vec![none(z)])?.equals((1.0 - p_det).into()));
                    }
                }
                DetectionConstraint::Average => {
                    let terms = (0..4).map(|z| StatTerm { weight: C64::new(0.25, 0.0), ..none(z) }).collect();
                    constraints.push(f(terms)?.equals((1.0 - p_det).into()));
                }
            }
            let err = |y: usize, wrong: [usize; 2], z: [usize; 2]| {
                vec![
                    StatTerm::new(z[0], z[0], alphabet.word(0, y, wrong[0]), 0.5),
                    StatTerm::new(z[1], z[1], alphabet.word(0, y, wrong[1]), 0.5),
                ]
            };
            constraints.push(f(err(0, [1, 0], [0, 1]))?.equals((eps0 * p_det).into()));
            constraints.push(f(err(1, [1, 0], [2, 3]))?.equals((eps1 * p_det).into()));
            Ok((constraints, f(phase_error_terms(&alphabet))?))
        },
        Sense::Maximize,
    )
}

/// Result of one phase-encoding key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseQkdPoint {
    pub mu: f64,
    pub loss_db: f64,
    /// Certified upper bound on the phase error rate.
    pub eps_ph: f64,
    pub key: KeyRateResult,
    pub status: Status,
}

/// Key rate at one `μ`; a solver failure yields rate zero with its status.
pub fn solve_phase_qkd(cfg: &PhaseQkdConfig, opts: &SolverOptions) -> Result<PhaseQkdPoint> {
    let (p_det, eps) = cfg.honest_stats()?;
    let p = build_phase_qkd_with(cfg, p_det, eps, eps)?;
    let r = solve(&realify(&p), opts)?;
    Ok(key_point(cfg.mu, cfg.loss_db, p_det, eps, r.status, r.value()))
}

fn key_point(mu: f64, loss_db: f64, p_det: f64, eps0: f64, status: Status, bound: f64) -> PhaseQkdPoint {
    let (eps_ph, key) = secure_rate(p_det, eps0, status, bound);
    PhaseQkdPoint { mu, loss_db, eps_ph, key, status }
}

/// Key rate from a bound on `ε_ph · p_det`. The bound is capped at 1/2, where
/// `h2` peaks; a failed solve gives no key.
pub(crate) fn secure_rate(p_det: f64, eps0: f64, status: Status, bound: f64) -> (f64, KeyRateResult) {
    let eps_ph = if status == Status::Optimal { (bound / p_det).clamp(0.0, 0.5) } else { 0.5 };
    let key = keyrate(p_det, eps0.clamp(0.0, 1.0), eps_ph).unwrap_or(KeyRateResult { rate: 0.0, eps_ph, p_det, eps0 });
    (eps_ph, key)
}

/// `count` log-spaced values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect(),
    }
}

/// 20 log-spaced intensities in `[1e-3, 1]`.
pub fn default_mu_grid() -> Vec<f64> {
    log_grid(1e-3, 1.0, 20)
}

/// Best key rate over `mu_grid`; ties go to the smaller `μ`. When no point
/// gives key, the first grid point is returned.
pub fn optimize_mu(base: &PhaseQkdConfig, mu_grid: &[f64], opts: &SolverOptions) -> Result<PhaseQkdPoint> {
    let points =
        mu_grid.iter().map(|&mu| solve_phase_qkd(&PhaseQkdConfig { mu, ..*base }, opts)).collect::<Result<Vec<_>>>()?;
    best_point(points).ok_or_else(|| Error::InvalidParameter("empty mu grid".into()))
}

/// Highest rate, ties broken toward the smaller `μ`.
pub fn best_point(points: Vec<PhaseQkdPoint>) -> Option<PhaseQkdPoint> {
    let mut best: Option<PhaseQkdPoint> = None;
    for p in points {
        best = match best {
            Some(b) if p.key.rate > b.key.rate || (p.key.rate == b.key.rate && p.mu < b.mu) => Some(p),
            None => Some(p),
            keep => keep,
        };
    }
    best
}
