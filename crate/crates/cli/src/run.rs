//! Scenario execution: parallel grid sweeps whose rows are written in grid
//! order and flushed as soon as they are complete.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::mpsc;

use pmset::scenarios::{
    best_mu, best_point, build_cow, build_phase_qkd, build_qrac, solve_cow, solve_phase_qkd, solve_qrac, CowConfig,
    CowPoint, PhaseQkdConfig, PhaseQkdPoint, QracConfig,
};
use pmset::sdp::{export_sdpa, realify};
use pmset::Status;
use rayon::prelude::*;

use crate::config::{CowRun, ExportRun, ExportTarget, PhaseRun, QracRun, SolverRun};

/// Whether every solve of a run reached optimality.
pub type AllOptimal = bool;

/// The file at `out`, or standard output when it is absent or `-`.
pub fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, String> {
    match out {
        None => Ok(Box::new(io::stdout().lock())),
        Some(path) if path.as_os_str() == "-" => Ok(Box::new(io::stdout().lock())),
        Some(path) => {
            let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

/// Evaluates `job` on every item on `threads` workers (0 for all cores) and
/// hands the results to `emit` in item order.
pub fn sweep<T, R, F, E>(threads: usize, items: &[T], job: F, mut emit: E) -> Result<(), String>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
    E: FnMut(R) -> Result<(), String>,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        let job = &job;
        scope.spawn(move || {
            pool.install(|| {
                items.par_iter().enumerate().for_each_with(tx, |tx, (i, item)| {
                    // The receiver only disappears after an emit error, when
                    // the remaining results are no longer wanted.
                    let _ = tx.send((i, job(item)));
                });
            })
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&next) {
                emit(r)?;
                next += 1;
            }
        }
        Ok(())
    })
}

fn row(out: &mut dyn Write, fields: &[String]) -> Result<(), String> {
    writeln!(out, "{}", fields.join(",")).and_then(|_| out.flush()).map_err(|e| e.to_string())
}

fn header(out: &mut dyn Write, names: &str) -> Result<(), String> {
    row(out, &[names.to_string()])
}

fn report_failure(what: String, status: Status) {
    eprintln!("warning: {what}: solver status {status}");
}

pub fn qrac(run: &QracRun, solver: &SolverRun) -> Result<AllOptimal, String> {
    let mut out = open_output(&run.out)?;
    header(&mut *out, "tau,p_alice_max,status,gap")?;
    let mut all_optimal = true;
    sweep(
        solver.jobs,
        &run.taus,
        |&tau| solve_qrac(&QracConfig { tau, level: run.level }, &solver.opts),
        |point| {
            let p = point.map_err(|e| e.to_string())?;
            if p.status != Status::Optimal {
                all_optimal = false;
                report_failure(format!("tau {}", p.tau), p.status);
            }
            let fields = [p.tau.to_string(), p.p_a.to_string(), p.status.to_string(), (p.p_a - p.primal).to_string()];
            row(&mut *out, &fields)
        },
    )?;
    Ok(all_optimal)
}

/// Groups consecutive results into chunks of `size`, calling `emit` on each.
fn chunked<R>(size: usize, mut emit: impl FnMut(Vec<R>) -> Result<(), String>) -> impl FnMut(R) -> Result<(), String> {
    let mut buffer = Vec::with_capacity(size);
    move |r| {
        buffer.push(r);
        if buffer.len() == size {
            emit(std::mem::take(&mut buffer))?;
        }
        Ok(())
    }
}

pub fn phase_qkd(run: &PhaseRun, solver: &SolverRun) -> Result<AllOptimal, String> {
    let mut out = open_output(&run.out)?;
    header(&mut *out, "loss_db,mu_opt,eps_ph,keyrate,status")?;
    let jobs: Vec<(f64, f64)> = run.losses.iter().flat_map(|&l| run.mus.iter().map(move |&mu| (l, mu))).collect();
    let mut all_optimal = true;
    sweep(
        solver.jobs,
        &jobs,
        |&(loss_db, mu)| {
            let cfg = PhaseQkdConfig {
                detection: run.detection,
                ..PhaseQkdConfig::new(mu, loss_db, run.pdc, run.eopt, run.level)
            };
            solve_phase_qkd(&cfg, &solver.opts)
        },
        chunked(run.mus.len(), |points: Vec<pmset::Result<PhaseQkdPoint>>| {
            let points = points.into_iter().collect::<pmset::Result<Vec<_>>>().map_err(|e| e.to_string())?;
            for p in points.iter().filter(|p| p.status != Status::Optimal) {
                all_optimal = false;
                report_failure(format!("loss {} dB, mu {}", p.loss_db, p.mu), p.status);
            }
            let b = best_point(points).expect("mu grid is non-empty");
            let fields = [
                b.loss_db.to_string(),
                b.mu.to_string(),
                b.eps_ph.to_string(),
                b.key.rate.to_string(),
                b.status.to_string(),
            ];
            row(&mut *out, &fields)
        }),
    )?;
    Ok(all_optimal)
}

pub fn cow(run: &CowRun, solver: &SolverRun) -> Result<AllOptimal, String> {
    let mut out = open_output(&run.out)?;
    header(&mut *out, "ratio,loss_db,keyrate,status")?;
    let mut jobs = Vec::new();
    for &loss_db in &run.losses {
        for &ratio in &run.ratios {
            for &mu in &run.mus {
                jobs.push((loss_db, ratio, mu));
            }
        }
    }
    let mut all_optimal = true;
    sweep(
        solver.jobs,
        &jobs,
        |&(loss_db, ratio, mu)| {
            let cfg = CowConfig {
                mu,
                ratios: vec![ratio],
                delta: run.delta,
                bs_t: run.bs_t,
                loss_db,
                p_dc: run.pdc,
                level: run.level,
                monitor: run.monitor,
            };
            solve_cow(&cfg, ratio, &solver.opts)
        },
        chunked(run.mus.len(), |points: Vec<pmset::Result<CowPoint>>| {
            let points = points.into_iter().collect::<pmset::Result<Vec<_>>>().map_err(|e| e.to_string())?;
            for p in points.iter().filter(|p| p.status != Status::Optimal) {
                all_optimal = false;
                report_failure(format!("loss {} dB, ratio {}, mu {}", p.loss_db, p.ratio, p.mu), p.status);
            }
            let b = best_mu(&points).expect("mu grid is non-empty");
            row(&mut *out, &[b.ratio.to_string(), b.loss_db.to_string(), b.key.rate.to_string(), b.status.to_string()])
        }),
    )?;
    Ok(all_optimal)
}

pub fn export(run: &ExportRun) -> Result<(), String> {
    let problem = match run.target {
        ExportTarget::Qrac { tau } => build_qrac(&QracConfig { tau, level: run.level }),
        ExportTarget::PhaseQkd { mu, loss_db, pdc, eopt } => {
            build_phase_qkd(&PhaseQkdConfig::new(mu, loss_db, pdc, eopt, run.level))
        }
        ExportTarget::Cow { mu, loss_db, ratio, delta, bs_t, pdc } => {
            let cfg =
                CowConfig { mu, ratios: vec![ratio], delta, bs_t, loss_db, p_dc: pdc, level: run.level, monitor: true };
            cfg.honest_stats(ratio).and_then(|stats| build_cow(&cfg, ratio, &stats))
        }
    }
    .map_err(|e| e.to_string())?;
    let text = export_sdpa(&realify(&problem)).map_err(|e| e.to_string())?;
    let mut out = open_output(&run.out)?;
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| e.to_string())
}
