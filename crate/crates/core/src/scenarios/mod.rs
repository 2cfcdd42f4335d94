//! The applications: the two-receiver random access code and the two
//! coherent-state key distribution protocols, with the key-rate layer.

mod cow;
mod keyrate;
mod qkd;
mod qrac;

pub use cow::{
    best_mu, best_ratio, build_cow, cow_phase_error_terms, default_ratio_grid, optimize_beta, optimize_cow, solve_cow,
    CowConfig, CowPoint,
};
pub use keyrate::{binary_entropy, keyrate, KeyRateResult};
pub use qkd::{
    best_point, build_phase_qkd, build_phase_qkd_with, default_mu_grid, log_grid, optimize_mu, phase_error_functional,
    phase_error_terms, purified_error_terms, qkd_alphabet, solve_phase_qkd, transmittance, DetectionConstraint,
    PhaseQkdConfig, PhaseQkdPoint, NO_CLICK,
};
pub use qrac::{build_qrac, qrac_boundary, qrac_circle, qrac_guess_terms, solve_qrac, QracConfig, QracPoint};
