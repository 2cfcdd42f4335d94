//! Two receivers decoding one of two bits encoded in a single code state.
//!
//! The code states are indexed `z = 2 z0 + z1` and have the Gram matrix of the
//! conjugate-coding qubit states. Receiver `p` (0 for Alice, 1 for Bob) is
//! given a position `x` and guesses `z_x`; its guessing probability is
//! `(1/8) Σ_{z, x} <φ_z| E^{z_x}_x |φ_z>`.

use crate::gram::{conjugate_coding_vectors, gram_from_vectors};
use crate::moment::{assemble, statistic_functional, Sense, StatTerm};
use crate::sdp::{realify, solve};
use crate::{Alphabet, Error, RelaxationProblem, Result, SolverOptions, Status};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QracConfig {
    /// Bob's guessing probability, in `[1/2, 1]`.
    pub tau: f64,
    pub level: usize,
}

impl QracConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.tau) {
            return Err(Error::InvalidParameter(format!("tau {} outside [1/2, 1]", self.tau)));
        }
        if self.level == 0 {
            return Err(Error::InvalidParameter("level must be at least 1".into()));
        }
        Ok(())
    }
}

/// Terms of receiver `party`'s guessing probability.
pub fn qrac_guess_terms(alphabet: &Alphabet, party: usize) -> Vec<StatTerm> {
    let mut out = Vec::new();
    for z in 0..4 {
        let bits = [z >> 1, z & 1];
        for (x, &bit) in bits.iter().enumerate() {
            out.push(StatTerm::new(z, z, alphabet.word(party, x, bit), 0.125));
        }
    }
    out
}

/// Maximise Alice's guessing probability with Bob's fixed to `tau`.
pub fn build_qrac(cfg: &QracConfig) -> Result<RelaxationProblem> {
    cfg.validate()?;
    let alphabet = Alphabet::uniform(2, 2, 2)?;
    let gram = gram_from_vectors(&conjugate_coding_vectors())?;
    let tau = cfg.tau;
    assemble(
        &gram,
        &alphabet,
        cfg.level,
        |table| {
            let alice = statistic_functional(&alphabet, table, &qrac_guess_terms(&alphabet, 0))?;
            let bob = statistic_functional(&alphabet, table, &qrac_guess_terms(&alphabet, 1))?;
            Ok((vec![bob.equals(tau.into())], alice))
        },
        Sense::Maximize,
    )
}

/// Optimum of one boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct QracPoint {
    pub tau: f64,
    pub level: usize,
    /// Certified upper bound on Alice's guessing probability.
    pub p_a: f64,
    /// Alice's guessing probability at the returned moment matrix.
    pub primal: f64,
    pub status: Status,
    pub iterations: usize,
}

pub fn solve_qrac(cfg: &QracConfig, opts: &SolverOptions) -> Result<QracPoint> {
    let p = build_qrac(cfg)?;
    let r = solve(&realify(&p), opts)?;
    Ok(QracPoint {
        tau: cfg.tau,
        level: cfg.level,
        p_a: r.value(),
        primal: r.primal_value,
        status: r.status,
        iterations: r.iterations,
    })
}

/// One optimum per value of `taus`, in order.
pub fn qrac_boundary(taus: &[f64], level: usize, opts: &SolverOptions) -> Result<Vec<QracPoint>> {
    let top = qrac_circle(0.5);
    for &tau in taus {
        if !(0.5..=top + 1e-12).contains(&tau) {
            return Err(Error::InvalidParameter(format!("tau {tau} outside [1/2, {top}]")));
        }
    }
    taus.iter().map(|&tau| solve_qrac(&QracConfig { tau, level }, opts)).collect()
}

/// Largest `p_A` on the circle `(2 p_A - 1)² + (2 p_B - 1)² = 1/2` for `p_B = tau`.
pub fn qrac_circle(tau: f64) -> f64 {
    let r = 0.5 - (2.0 * tau - 1.0).powi(2);
    0.5 + 0.5 * r.max(0.0).sqrt()
}
