//! Time-bin coherent-state key distribution with an optimised test sequence.
//!
//! States: bit 0 `|0>|α>`, bit 1 `|α>|0>` (with finite extinction) and the
//! test sequence `|β>|β>`. Bob's setting 0 is the data line (outcome 0 for
//! bit 0, 1 for bit 1), setting 1 the monitoring interferometer (ports 0 and
//! 1); the no-click outcome is shared. The phase error uses Alice's virtual
//! `{|0>, |1>}` measurement on the purification over the bit states: `|0>`
//! leaves Bob with `|φ_0> + |φ_1>`, which exits port 0, so port 1 is its error.

use crate::gram::gram_cow;
use crate::moment::{assemble, statistic_functional, Sense, StatTerm};
use crate::physics::{cow_honest_stats, StatisticsTable};
use crate::sdp::{realify, solve};
use crate::{Error, RelaxationProblem, Result, SolverOptions, Status, C64};

use super::keyrate::KeyRateResult;
use super::qkd::{purified_error_terms, qkd_alphabet, secure_rate, transmittance, NO_CLICK};

#[derive(Debug, Clone, PartialEq)]
pub struct CowConfig {
    /// Mean photon number `|α|²` of the bit pulse.
    pub mu: f64,
    /// Values of `β/α` to scan.
    pub ratios: Vec<f64>,
    /// Extinction: the dark slot carries `√δ α`.
    pub delta: f64,
    /// Transmittance of the monitoring splitter.
    pub bs_t: f64,
    pub loss_db: f64,
    pub p_dc: f64,
    pub level: usize,
    /// Whether the monitoring-line statistics are imposed. The key states
    /// enter with their own two pulses interfered, never across encodings.
    pub monitor: bool,
}

impl CowConfig {
    /// Error-free devices apart from dark counts: no extinction, balanced splitter.
    pub fn ideal(mu: f64, loss_db: f64, level: usize) -> Self {
        Self { mu, ratios: default_ratio_grid(), delta: 0.0, bs_t: 0.5, loss_db, p_dc: 1e-7, level, monitor: true }
    }

    pub fn eta(&self) -> f64 {
        transmittance(self.loss_db)
    }

    pub fn alpha(&self) -> C64 {
        C64::new(self.mu.sqrt(), 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu {} must be positive", self.mu)));
        }
        if self.ratios.is_empty() {
            return Err(Error::InvalidParameter("empty ratio grid".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::InvalidParameter(format!("ratio {r} outside (0, 1]")));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!("delta {} outside [0, 1)", self.delta)));
        }
        if !(self.bs_t > 0.0 && self.bs_t < 1.0) {
            return Err(Error::InvalidParameter(format!("bs_t {} outside (0, 1)", self.bs_t)));
        }
        if !(self.loss_db >= 0.0) || !(0.0..=1.0).contains(&self.p_dc) {
            return Err(Error::InvalidParameter("loss must be non-negative and p_dc in [0, 1]".into()));
        }
        if self.level == 0 {
            return Err(Error::InvalidParameter("level must be at least 1".into()));
        }
        Ok(())
    }

    /// Honest statistics at `β = ratio · α`.
    pub fn honest_stats(&self, ratio: f64) -> Result<StatisticsTable> {
        self.validate()?;
        cow_honest_stats(self.alpha(), self.alpha() * ratio, self.delta, self.bs_t, self.eta(), self.p_dc)
    }
}

/// `{0.1, 0.2, …, 1.0}`.
pub fn default_ratio_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}

/// Phase errors of the bit states against the monitoring line.
pub fn cow_phase_error_terms(alphabet: &crate::Alphabet) -> Vec<StatTerm> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    purified_error_terms(alphabet, [0, 1], 1, [[one, zero], [zero, one]], [1, 0])
}

/// Relaxation maximising `ε_ph · p_det` for `β = ratio · α` at `stats`.
pub fn build_cow(cfg: &CowConfig, ratio: f64, stats: &StatisticsTable) -> Result<RelaxationProblem> {
    cfg.validate()?;
    let alphabet = qkd_alphabet()?;
    let gram = gram_cow(cfg.alpha(), cfg.alpha() * ratio, cfg.delta)?;
    assemble(
        &gram,
        &alphabet,
        cfg.level,
        |table| {
            let f = |terms: Vec<StatTerm>| statistic_functional(&alphabet, table, &terms);
            let single = |z: usize, y: usize, b: usize| f(vec![StatTerm::new(z, z, alphabet.word(0, y, b), 1.0)]);
            let mut constraints = Vec::new();
            for z in 0..3 {
                constraints.push(single(z, 0, NO_CLICK)?.equals(stats.single(NO_CLICK, 0, z).into()));
            }
            for z in 0..2 {
                for b in 0..2 {
                    constraints.push(single(z, 0, b)?.equals(stats.single(b, 0, z).into()));
                }
            }
            if cfg.monitor {
                for z in 0..3 {
                    for b in 0..2 {
                        constraints.push(single(z, 1, b)?.equals(stats.single(b, 1, z).into()));
                    }
                }
            }
            Ok((constraints, f(cow_phase_error_terms(&alphabet))?))
        },
        Sense::Maximize,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CowPoint {
    pub mu: f64,
    pub ratio: f64,
    pub loss_db: f64,
    pub eps_ph: f64,
    pub key: KeyRateResult,
    pub status: Status,
}

pub fn solve_cow(cfg: &CowConfig, ratio: f64, opts: &SolverOptions) -> Result<CowPoint> {
    let stats = cfg.honest_stats(ratio)?;
    let p = build_cow(cfg, ratio, &stats)?;
    let r = solve(&realify(&p), opts)?;
    let (eps_ph, key) = secure_rate(stats.p_det, stats.eps0, r.status, r.value());
    Ok(CowPoint { mu: cfg.mu, ratio, loss_db: cfg.loss_db, eps_ph, key, status: r.status })
}

/// One point per ratio of `cfg.ratios`, in order.
pub fn optimize_beta(cfg: &CowConfig, opts: &SolverOptions) -> Result<Vec<CowPoint>> {
    cfg.validate()?;
    cfg.ratios.iter().map(|&r| solve_cow(cfg, r, opts)).collect()
}

/// For each ratio of `cfg.ratios`, the best point over `mu_grid` (ties go to
/// the smaller `μ`).
pub fn optimize_cow(cfg: &CowConfig, mu_grid: &[f64], opts: &SolverOptions) -> Result<Vec<CowPoint>> {
    cfg.validate()?;
    if mu_grid.is_empty() {
        return Err(Error::InvalidParameter("empty mu grid".into()));
    }
    cfg.ratios
        .iter()
        .map(|&ratio| {
            let points = mu_grid
                .iter()
                .map(|&mu| solve_cow(&CowConfig { mu, ..cfg.clone() }, ratio, opts))
                .collect::<Result<Vec<_>>>()?;
            Ok(best_mu(&points).expect("non-empty grid"))
        })
        .collect()
}

/// Highest-rate point; ties go to the smaller `μ`.
pub fn best_mu(points: &[CowPoint]) -> Option<CowPoint> {
    points.iter().copied().fold(None, |best, p| match best {
        Some(b) if !(p.key.rate > b.key.rate || (p.key.rate == b.key.rate && p.mu < b.mu)) => Some(b),
        _ => Some(p),
    })
}

/// Highest-rate point; ties go to the first in grid order.
pub fn best_ratio(points: &[CowPoint]) -> Option<CowPoint> {
    points.iter().copied().fold(None, |best, p| match best {
        Some(b) if b.key.rate >= p.key.rate => Some(b),
        _ => Some(p),
    })
}
