//! Outer approximations of the correlations achievable in prepare-and-measure
//! quantum networks, given only the Gram matrix of the code states.
//!
//! The pipeline is: describe the code states ([`gram`]), declare the receivers'
//! measurement alphabet ([`opalg`]), build the block moment matrix relaxation at
//! some hierarchy level ([`moment`]), then turn it into a real semidefinite
//! program and solve it ([`sdp`]). [`physics`] holds explicit honest models used
//! as oracles, and [`scenarios`] packages the QRAC and QKD applications.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gram;
pub mod moment;
pub mod opalg;
pub mod physics;
pub mod scenarios;
pub mod sdp;

pub use error::{Error, Result};
pub use gram::GramMatrix;
pub use moment::{Functional, RelaxationProblem, Sense};
pub use opalg::{Alphabet, MonomialBasis, OpId, Word};
pub use sdp::{RealSdp, SolverOptions, SolverResult, Status};

pub use nalgebra;
pub use nalgebra::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
