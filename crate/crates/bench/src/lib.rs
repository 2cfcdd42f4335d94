//! Fixed problem instances shared by the benchmarks in `benches/`.

use pmset::scenarios::{build_cow, build_phase_qkd, build_qrac, CowConfig, PhaseQkdConfig, QracConfig};
use pmset::sdp::realify;
use pmset::RealSdp;

/// QRAC boundary point at `τ = 0.6`.
pub fn qrac(level: usize) -> RealSdp {
    realify(&build_qrac(&QracConfig { tau: 0.6, level }).expect("valid QRAC instance"))
}

/// Phase-encoding instance at `μ = 0.1` over 3 dB.
pub fn phase_qkd(level: usize) -> RealSdp {
    realify(&build_phase_qkd(&PhaseQkdConfig::new(0.1, 3.0, 1e-7, 0.02, level)).expect("valid phase instance"))
}

/// Time-bin instance at `μ = 0.1`, `β = α/2`, over 3 dB.
pub fn cow(level: usize) -> RealSdp {
    let cfg = CowConfig::ideal(0.1, 3.0, level);
    let stats = cfg.honest_stats(0.5).expect("valid time-bin instance");
    realify(&build_cow(&cfg, 0.5, &stats).expect("valid time-bin instance"))
}
