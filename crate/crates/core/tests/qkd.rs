mod common;

use common::honest_value;
use pmset::physics::{cow_model, phase_qkd_model};
use pmset::scenarios::{
    best_point, best_ratio, build_cow, build_phase_qkd, build_phase_qkd_with, cow_phase_error_terms, optimize_beta,
    optimize_cow, optimize_mu, phase_error_terms, qkd_alphabet, solve_cow, solve_phase_qkd, CowConfig,
    DetectionConstraint, PhaseQkdConfig,
};
use pmset::sdp::{check_solution, realify, solve};
use pmset::{SolverOptions, Status};

fn opts() -> SolverOptions {
    SolverOptions { tol: 1e-7, ..Default::default() }
}

fn phase_cfg(mu: f64, loss_db: f64) -> PhaseQkdConfig {
    PhaseQkdConfig::new(mu, loss_db, 1e-7, 0.02, 2)
}

#[test]
fn lossless_error_free_link_gives_key() {
    let cfg = PhaseQkdConfig::new(0.1, 0.0, 1e-7, 0.0, 2);
    let p = solve_phase_qkd(&cfg, &opts()).unwrap();
    assert_eq!(p.status, Status::Optimal);
    assert!(p.eps_ph < 0.1, "{p:?}");
    assert!(p.key.rate > 0.0);
}

#[test]
fn noisy_test_basis_leaves_no_phase_information() {
    let cfg = phase_cfg(0.1, 0.0);
    let (p_det, eps) = cfg.honest_stats().unwrap();
    let p = build_phase_qkd_with(&cfg, p_det, eps, 0.5).unwrap();
    let r = solve(&realify(&p), &opts()).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!(r.value() / p_det >= 0.5 - 1e-3, "{}", r.value() / p_det);
}

#[test]
fn honest_phase_error_is_below_the_bound() {
    let alphabet = qkd_alphabet().unwrap();
    for (mu, loss) in [(0.05, 0.0), (0.1, 2.0), (0.3, 4.0), (0.02, 10.0)] {
        let cfg = phase_cfg(mu, loss);
        let model = phase_qkd_model(mu, cfg.eta(), cfg.p_dc, cfg.e_opt).unwrap();
        let (p_det, _) = cfg.honest_stats().unwrap();
        let honest = honest_value(&model, &alphabet, &phase_error_terms(&alphabet)) / p_det;
        let r = solve(&realify(&build_phase_qkd(&cfg).unwrap()), &opts()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!(honest <= r.value() / p_det + 1e-6, "mu {mu} loss {loss}: honest {honest} bound {}", r.value() / p_det);
    }
}

#[test]
fn relaxation_solution_passes_the_check() {
    let p = build_phase_qkd(&phase_cfg(0.1, 2.0)).unwrap();
    let r = solve(&realify(&p), &SolverOptions::default()).unwrap();
    assert_eq!(r.status, Status::Optimal);
    let report = check_solution(&p, &r.solution, 1e-5);
    assert!(report.passed(), "{report}");
}

#[test]
fn averaged_detection_is_a_relaxation_of_per_state() {
    let strict = phase_cfg(0.1, 2.0);
    let loose = PhaseQkdConfig { detection: DetectionConstraint::Average, ..strict };
    let a = solve(&realify(&build_phase_qkd(&strict).unwrap()), &opts()).unwrap();
    let b = solve(&realify(&build_phase_qkd(&loose).unwrap()), &opts()).unwrap();
    assert_eq!(b.status, Status::Optimal);
    assert!(b.value() >= a.value() - 1e-6);
}

#[test]
fn optimised_rate_is_positive_and_falls_with_loss() {
    let grid = [0.01, 0.03, 0.1, 0.3];
    let rates: Vec<f64> =
        [0.0, 2.0, 4.0].iter().map(|&l| optimize_mu(&phase_cfg(0.1, l), &grid, &opts()).unwrap().key.rate).collect();
    assert!(rates[0] > 0.0);
    assert!(rates[1] <= rates[0] + 1e-9 && rates[2] <= rates[1] + 1e-9, "{rates:?}");
}

#[test]
fn single_point_grid_returns_that_point() {
    let p = optimize_mu(&phase_cfg(0.1, 0.0), &[0.07], &opts()).unwrap();
    assert_eq!(p.mu, 0.07);
    assert!(optimize_mu(&phase_cfg(0.1, 0.0), &[], &opts()).is_err());
    assert!(best_point(Vec::new()).is_none());
}

#[test]
fn ties_go_to_the_smaller_intensity() {
    let a = solve_phase_qkd(&phase_cfg(0.05, 60.0), &opts()).unwrap();
    let b = solve_phase_qkd(&phase_cfg(0.02, 60.0), &opts()).unwrap();
    assert_eq!(a.key.rate, 0.0);
    assert_eq!(b.key.rate, 0.0);
    assert_eq!(best_point(vec![a, b]).unwrap().mu, 0.02);
}

#[test]
fn phase_configuration_errors() {
    assert!(build_phase_qkd(&PhaseQkdConfig::new(-0.1, 0.0, 1e-7, 0.02, 2)).is_err());
    assert!(build_phase_qkd(&PhaseQkdConfig::new(0.1, 0.0, 1e-7, 0.02, 0)).is_err());
    assert!(build_phase_qkd(&PhaseQkdConfig::new(0.0, 0.0, 0.0, 0.02, 2)).is_err());
}

fn cow_cfg(mu: f64, loss_db: f64) -> CowConfig {
    CowConfig::ideal(mu, loss_db, 2)
}

#[test]
fn cow_without_monitoring_has_no_phase_information() {
    let cfg = CowConfig { monitor: false, ..cow_cfg(0.1, 0.0) };
    let p = solve_cow(&cfg, 1.0, &opts()).unwrap();
    assert_eq!(p.eps_ph, 0.5);
    assert_eq!(p.key.rate, 0.0);
}

#[test]
fn cow_original_encoding_is_bounded_at_zero_loss() {
    let p = solve_cow(&cow_cfg(0.1, 0.0), 1.0, &opts()).unwrap();
    assert_eq!(p.status, Status::Optimal);
    assert!(p.eps_ph < 0.5);
    assert!(p.key.rate > 0.0);
}

#[test]
fn cow_honest_phase_error_is_below_the_bound() {
    let alphabet = qkd_alphabet().unwrap();
    for (mu, loss, ratio) in [(0.1, 0.0, 1.0), (0.1, 6.0, 0.5), (0.03, 10.0, 0.5)] {
        let cfg = cow_cfg(mu, loss);
        let model = cow_model(cfg.alpha(), cfg.alpha() * ratio, cfg.delta, cfg.bs_t, cfg.eta(), cfg.p_dc).unwrap();
        let stats = cfg.honest_stats(ratio).unwrap();
        let honest = honest_value(&model, &alphabet, &cow_phase_error_terms(&alphabet)) / stats.p_det;
        let r = solve(&realify(&build_cow(&cfg, ratio, &stats).unwrap()), &opts()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!(
            honest <= r.value() / stats.p_det + 1e-6,
            "{mu} {loss} {ratio}: {honest} vs {}",
            r.value() / stats.p_det
        );
    }
}

#[test]
fn cow_weaker_test_sequence_tolerates_more_loss() {
    let grid = [0.01, 0.03, 0.1, 0.2];
    let original = optimize_cow(&CowConfig { ratios: vec![1.0], ..cow_cfg(0.1, 6.0) }, &grid, &opts()).unwrap();
    assert_eq!(original.len(), 1);
    assert_eq!(original[0].key.rate, 0.0);
    let weak = optimize_cow(&CowConfig { ratios: vec![0.5], ..cow_cfg(0.1, 10.0) }, &grid, &opts()).unwrap();
    assert!(weak[0].key.rate > 0.0, "{:?}", weak[0]);
    assert!(grid.contains(&weak[0].mu));
}

#[test]
fn cow_ratio_scan_keeps_grid_order() {
    let cfg = CowConfig { ratios: vec![1.0, 0.5], ..cow_cfg(0.1, 3.0) };
    let points = optimize_beta(&cfg, &opts()).unwrap();
    assert_eq!(points.iter().map(|p| p.ratio).collect::<Vec<_>>(), vec![1.0, 0.5]);
    let best = best_ratio(&points).unwrap();
    assert!(points.iter().all(|p| p.key.rate <= best.key.rate));
    assert_eq!(best_ratio(&points[..1]).unwrap(), points[0]);
}

#[test]
fn cow_configuration_errors() {
    let base = cow_cfg(0.1, 0.0);
    assert!(CowConfig { ratios: vec![], ..base.clone() }.validate().is_err());
    assert!(CowConfig { ratios: vec![1.5], ..base.clone() }.validate().is_err());
    assert!(CowConfig { delta: 1.0, ..base.clone() }.validate().is_err());
    assert!(CowConfig { bs_t: 1.0, ..base.clone() }.validate().is_err());
    assert!(CowConfig { mu: 0.0, ..base.clone() }.validate().is_err());
    assert!(optimize_cow(&base, &[], &opts()).is_err());
}
