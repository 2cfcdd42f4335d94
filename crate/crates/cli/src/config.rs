//! Run configuration: an optional TOML file with one section per scenario,
//! overridden field by field by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use pmset::gram::{validate_gram, StateFamilySpec};
use pmset::nalgebra::{DMatrix, DVector};
use pmset::scenarios::{default_mu_grid, default_ratio_grid, log_grid, DetectionConstraint};
use pmset::{SolverOptions, C64};
use serde::Deserialize;

/// A grid given as a list of numbers, a single number, or text: either a
/// comma-separated list or `start:stop:count`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Single(f64),
    Text(String),
}

/// How `start:stop:count` ranges are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl GridSpec {
    pub fn parse(&self, name: &str, spacing: Spacing) -> Result<Vec<f64>, String> {
        let text = match self {
            GridSpec::List(v) => return Ok(v.clone()),
            GridSpec::Single(x) => return Ok(vec![*x]),
            GridSpec::Text(t) => t.trim(),
        };
        if text.is_empty() {
            return Ok(Vec::new());
        }
        let number = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("{name}: `{s}` is not a number"));
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            let [a, b, n] = parts[..] else {
                return Err(format!("{name}: expected start:stop:count, got `{text}`"));
            };
            let (a, b) = (number(a)?, number(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("{name}: `{n}` is not a point count"))?;
            return match spacing {
                Spacing::Linear => Ok(match n {
                    0 => Vec::new(),
                    1 => vec![a],
                    _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
                }),
                Spacing::Log if n > 0 && (a <= 0.0 || b <= 0.0) => {
                    Err(format!("{name}: log-spaced range needs positive endpoints"))
                }
                Spacing::Log => Ok(log_grid(a, b, n)),
            };
        }
        text.split(',').map(number).collect()
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(GridSpec::Text(s.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolverSection {
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub dimension_cap: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct QracSection {
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tau_grid: Option<GridSpec>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PhaseSection {
    #[arg(long)]
    pub loss_db: Option<GridSpec>,
    #[arg(long)]
    pub mu_grid: Option<GridSpec>,
    #[arg(long)]
    pub pdc: Option<f64>,
    #[arg(long)]
    pub eopt: Option<f64>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub detection: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CowSection {
    #[arg(long)]
    pub loss_db: Option<GridSpec>,
    #[arg(long)]
    pub ratios: Option<GridSpec>,
    #[arg(long)]
    pub mu_grid: Option<GridSpec>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub bs_t: Option<f64>,
    #[arg(long)]
    pub pdc: Option<f64>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub monitor: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExportSection {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub loss_db: Option<f64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub pdc: Option<f64>,
    #[arg(long)]
    pub eopt: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub bs_t: Option<f64>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Code states as explicit vectors, per-state coherent mode amplitudes, or a
/// row-major Gram matrix; complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesSection {
    pub variant: String,
    pub vectors: Option<Vec<Vec<[f64; 2]>>>,
    pub modes: Option<Vec<Vec<[f64; 2]>>>,
    pub gram: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub solver: Option<SolverSection>,
    pub qrac: Option<QracSection>,
    #[serde(rename = "phase-qkd")]
    pub phase_qkd: Option<PhaseSection>,
    pub cow: Option<CowSection>,
    pub export: Option<ExportSection>,
    pub states: Option<StatesSection>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

/// Field-wise override: flags win over the file.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

/// Solver settings and parallelism.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    pub opts: SolverOptions,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
}

impl SolverRun {
    pub fn resolve(flags: &SolverSection, file: &SolverSection, diags: &mut Vec<String>) -> Self {
        let d = SolverOptions::default();
        let opts = SolverOptions {
            tol: pick(&flags.tol, &file.tol).unwrap_or(d.tol),
            max_iters: pick(&flags.max_iters, &file.max_iters).unwrap_or(d.max_iters),
            dimension_cap: pick(&flags.dimension_cap, &file.dimension_cap).unwrap_or(d.dimension_cap),
            verbose: false,
        };
        if !(1e-9..=1e-4).contains(&opts.tol) {
            diags.push(format!("tol {} out of [1e-9,1e-4]", opts.tol));
        }
        if opts.max_iters == 0 {
            diags.push("max-iters must be at least 1".into());
        }
        if opts.dimension_cap == 0 {
            diags.push("dimension-cap must be at least 1".into());
        }
        Self { opts, jobs: pick(&flags.jobs, &file.jobs).unwrap_or(0) }
    }
}

fn check_level(level: usize, diags: &mut Vec<String>) {
    if level == 0 {
        diags.push("level must be at least 1".into());
    }
}

fn check_unit(name: &str, v: f64, diags: &mut Vec<String>) {
    if !(0.0..=1.0).contains(&v) {
        diags.push(format!("{name} {v} out of [0,1]"));
    }
}

fn grid(spec: Option<GridSpec>, name: &str, spacing: Spacing, default: Vec<f64>, diags: &mut Vec<String>) -> Vec<f64> {
    let values = match spec {
        None => default,
        Some(s) => s.parse(name, spacing).unwrap_or_else(|e| {
            diags.push(e);
            Vec::new()
        }),
    };
    if values.is_empty() && !diags.iter().any(|d| d.starts_with(name)) {
        diags.push(format!("{name} is empty"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        diags.push(format!("{name}: {bad} is not finite"));
    }
    values
}

fn check_losses(losses: &[f64], diags: &mut Vec<String>) {
    for &l in losses {
        if l < 0.0 {
            diags.push(format!("loss {l} dB is negative"));
        }
    }
}

fn check_mus(mus: &[f64], diags: &mut Vec<String>) {
    for &mu in mus {
        if !(mu > 0.0) {
            diags.push(format!("mu {mu} must be positive"));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QracRun {
    pub taus: Vec<f64>,
    pub level: usize,
    pub out: Option<PathBuf>,
}

impl QracRun {
    pub fn resolve(flags: &QracSection, file: &QracSection, diags: &mut Vec<String>) -> Self {
        let spec = match (&flags.tau, &flags.tau_grid) {
            (Some(t), _) => Some(GridSpec::Single(*t)),
            (None, Some(g)) => Some(g.clone()),
            (None, None) => file.tau.map(GridSpec::Single).or_else(|| file.tau_grid.clone()),
        };
        let taus = grid(spec, "tau grid", Spacing::Linear, vec![0.5], diags);
        for &t in &taus {
            if !(0.5..=1.0).contains(&t) {
                diags.push(format!("tau {t} out of [0.5,1]"));
            }
        }
        let level = pick(&flags.level, &file.level).unwrap_or(1);
        check_level(level, diags);
        Self { taus, level, out: pick(&flags.out, &file.out) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRun {
    pub losses: Vec<f64>,
    pub mus: Vec<f64>,
    pub pdc: f64,
    pub eopt: f64,
    pub level: usize,
    pub detection: DetectionConstraint,
    pub out: Option<PathBuf>,
}

fn detection(name: Option<String>, diags: &mut Vec<String>) -> DetectionConstraint {
    match name.as_deref() {
        None | Some("per-state") => DetectionConstraint::PerState,
        Some("average") => DetectionConstraint::Average,
        Some(other) => {
            diags.push(format!("detection `{other}` is not per-state or average"));
            DetectionConstraint::PerState
        }
    }
}

impl PhaseRun {
    pub fn resolve(flags: &PhaseSection, file: &PhaseSection, diags: &mut Vec<String>) -> Self {
        let losses = grid(pick(&flags.loss_db, &file.loss_db), "loss grid", Spacing::Linear, vec![0.0], diags);
        check_losses(&losses, diags);
        let mus = grid(pick(&flags.mu_grid, &file.mu_grid), "mu grid", Spacing::Log, default_mu_grid(), diags);
        check_mus(&mus, diags);
        let pdc = pick(&flags.pdc, &file.pdc).unwrap_or(1e-7);
        check_unit("pdc", pdc, diags);
        let eopt = pick(&flags.eopt, &file.eopt).unwrap_or(0.02);
        check_unit("eopt", eopt, diags);
        let level = pick(&flags.level, &file.level).unwrap_or(2);
        check_level(level, diags);
        Self {
            losses,
            mus,
            pdc,
            eopt,
            level,
            detection: detection(pick(&flags.detection, &file.detection), diags),
            out: pick(&flags.out, &file.out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CowRun {
    pub losses: Vec<f64>,
    pub ratios: Vec<f64>,
    pub mus: Vec<f64>,
    pub delta: f64,
    pub bs_t: f64,
    pub pdc: f64,
    pub level: usize,
    pub monitor: bool,
    pub out: Option<PathBuf>,
}

fn check_cow_devices(delta: f64, bs_t: f64, pdc: f64, diags: &mut Vec<String>) {
    if !(0.0..1.0).contains(&delta) {
        diags.push(format!("delta {delta} out of [0,1)"));
    }
    if !(bs_t > 0.0 && bs_t < 1.0) {
        diags.push(format!("bs-t {bs_t} out of (0,1)"));
    }
    check_unit("pdc", pdc, diags);
}

impl CowRun {
    pub fn resolve(flags: &CowSection, file: &CowSection, diags: &mut Vec<String>) -> Self {
        let losses = grid(pick(&flags.loss_db, &file.loss_db), "loss grid", Spacing::Linear, vec![0.0], diags);
        check_losses(&losses, diags);
        let ratios =
            grid(pick(&flags.ratios, &file.ratios), "ratio grid", Spacing::Linear, default_ratio_grid(), diags);
        for &r in &ratios {
            if !(r > 0.0 && r <= 1.0) {
                diags.push(format!("ratio {r} out of (0,1]"));
            }
        }
        let mus = grid(pick(&flags.mu_grid, &file.mu_grid), "mu grid", Spacing::Log, default_mu_grid(), diags);
        check_mus(&mus, diags);
        let delta = pick(&flags.delta, &file.delta).unwrap_or(0.0);
        let bs_t = pick(&flags.bs_t, &file.bs_t).unwrap_or(0.5);
        let pdc = pick(&flags.pdc, &file.pdc).unwrap_or(1e-7);
        check_cow_devices(delta, bs_t, pdc, diags);
        let level = pick(&flags.level, &file.level).unwrap_or(2);
        check_level(level, diags);
        Self {
            losses,
            ratios,
            mus,
            delta,
            bs_t,
            pdc,
            level,
            monitor: pick(&flags.monitor, &file.monitor).unwrap_or(true),
            out: pick(&flags.out, &file.out),
        }
    }
}

/// One problem to write in SDPA format.
#[derive(Debug, Clone, PartialEq)]
pub enum ExportTarget {
    Qrac { tau: f64 },
    PhaseQkd { mu: f64, loss_db: f64, pdc: f64, eopt: f64 },
    Cow { mu: f64, loss_db: f64, ratio: f64, delta: f64, bs_t: f64, pdc: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportRun {
    pub target: ExportTarget,
    pub level: usize,
    pub out: Option<PathBuf>,
}

impl ExportRun {
    pub fn resolve(flags: &ExportSection, file: &ExportSection, diags: &mut Vec<String>) -> Self {
        let scenario = pick(&flags.scenario, &file.scenario).unwrap_or_else(|| "qrac".into());
        let mu = pick(&flags.mu, &file.mu).unwrap_or(0.1);
        let loss_db = pick(&flags.loss_db, &file.loss_db).unwrap_or(0.0);
        let pdc = pick(&flags.pdc, &file.pdc).unwrap_or(1e-7);
        let level = pick(&flags.level, &file.level).unwrap_or(if scenario == "qrac" { 1 } else { 2 });
        check_level(level, diags);
        let target = match scenario.as_str() {
            "qrac" => {
                let tau = pick(&flags.tau, &file.tau).unwrap_or(0.5);
                if !(0.5..=1.0).contains(&tau) {
                    diags.push(format!("tau {tau} out of [0.5,1]"));
                }
                ExportTarget::Qrac { tau }
            }
            "phase-qkd" | "cow" => {
                check_mus(&[mu], diags);
                check_losses(&[loss_db], diags);
                check_unit("pdc", pdc, diags);
                if scenario == "cow" {
                    let ratio = pick(&flags.ratio, &file.ratio).unwrap_or(0.5);
                    if !(ratio > 0.0 && ratio <= 1.0) {
                        diags.push(format!("ratio {ratio} out of (0,1]"));
                    }
                    let delta = pick(&flags.delta, &file.delta).unwrap_or(0.0);
                    let bs_t = pick(&flags.bs_t, &file.bs_t).unwrap_or(0.5);
                    check_cow_devices(delta, bs_t, pdc, diags);
                    ExportTarget::Cow { mu, loss_db, ratio, delta, bs_t, pdc }
                } else {
                    let eopt = pick(&flags.eopt, &file.eopt).unwrap_or(0.02);
                    check_unit("eopt", eopt, diags);
                    ExportTarget::PhaseQkd { mu, loss_db, pdc, eopt }
                }
            }
            other => {
                diags.push(format!("export scenario `{other}` is not qrac, phase-qkd or cow"));
                ExportTarget::Qrac { tau: 0.5 }
            }
        };
        Self { target, level, out: pick(&flags.out, &file.out) }
    }
}

fn complex(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl StatesSection {
    /// The described family, or the reasons it is malformed.
    pub fn family(&self) -> Result<StateFamilySpec, String> {
        let missing = |field: &str| format!("states: variant `{}` needs `{field}`", self.variant);
        match self.variant.as_str() {
            "vectors" => {
                let v = self.vectors.as_ref().ok_or_else(|| missing("vectors"))?;
                Ok(StateFamilySpec::ExplicitVectors(
                    v.iter().map(|s| DVector::from_iterator(s.len(), s.iter().map(complex))).collect(),
                ))
            }
            "modes" => {
                let m = self.modes.as_ref().ok_or_else(|| missing("modes"))?;
                Ok(StateFamilySpec::CoherentModes(m.iter().map(|s| s.iter().map(complex).collect()).collect()))
            }
            "gram" => {
                let g = self.gram.as_ref().ok_or_else(|| missing("gram"))?;
                let n = (g.len() as f64).sqrt().round() as usize;
                if n * n != g.len() {
                    return Err(format!("states: gram has {} entries, not a square count", g.len()));
                }
                Ok(StateFamilySpec::DirectGram(DMatrix::from_row_iterator(n, n, g.iter().map(complex))))
            }
            other => Err(format!("states: variant `{other}` is not vectors, modes or gram")),
        }
    }

    pub fn check(&self, diags: &mut Vec<String>) {
        match self.family() {
            Err(e) => diags.push(e),
            Ok(StateFamilySpec::DirectGram(g)) if g.nrows() > 0 => {
                let report = validate_gram(&g);
                if !report.passed() {
                    diags.push(format!("states: not a Gram matrix ({report})"));
                }
            }
            Ok(f) => {
                if let Err(e) = f.gram() {
                    diags.push(format!("states: {e}"));
                }
            }
        }
    }
}
