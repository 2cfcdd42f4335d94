//! `pmset`: boundary sweeps, key-rate sweeps and SDPA export for
//! prepare-and-measure relaxations.
//!
//! Exit status: 0 on success, 1 on a configuration or I/O error, 2 when any
//! solve ends without an optimal status (its rows are still written).
//! Command-line usage errors count as configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    CowRun, CowSection, ExportRun, ExportSection, FileConfig, PhaseRun, PhaseSection, QracRun, QracSection, SolverRun,
    SolverSection,
};

#[derive(Debug, Parser)]
#[command(name = "pmset", version, about = "Outer bounds on prepare-and-measure correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(flatten)]
    Run(Scenario),
    /// Report every configuration problem without solving.
    Validate(ValidateArgs),
}

#[derive(Debug, Subcommand)]
enum Scenario {
    /// Two-receiver random access code boundary over a grid of Bob's success probability.
    Qrac(ScenarioArgs<QracSection>),
    /// Phase-encoded key rate over a loss grid, optimised over the intensity.
    PhaseQkd(ScenarioArgs<PhaseSection>),
    /// Time-bin key rate per loss and test-sequence ratio, optimised over the intensity.
    Cow(ScenarioArgs<CowSection>),
    /// Write one relaxation in SDPA sparse format.
    Export(ScenarioArgs<ExportSection>),
}

#[derive(Debug, Args)]
struct ScenarioArgs<T: Args> {
    /// TOML file with [solver], [qrac], [phase-qkd], [cow], [export] and [states] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverSection,
    #[command(flatten)]
    params: T,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Check only this scenario, with its flags applied.
    #[command(subcommand)]
    scenario: Option<Scenario>,
}

/// A scenario with flags and file merged.
enum Resolved {
    Qrac(QracRun),
    PhaseQkd(PhaseRun),
    Cow(CowRun),
    Export(ExportRun),
}

impl Scenario {
    fn config(&self) -> &Option<PathBuf> {
        match self {
            Scenario::Qrac(a) => &a.config,
            Scenario::PhaseQkd(a) => &a.config,
            Scenario::Cow(a) => &a.config,
            Scenario::Export(a) => &a.config,
        }
    }

    fn solver(&self) -> &SolverSection {
        match self {
            Scenario::Qrac(a) => &a.solver,
            Scenario::PhaseQkd(a) => &a.solver,
            Scenario::Cow(a) => &a.solver,
            Scenario::Export(a) => &a.solver,
        }
    }

    fn resolve(&self, file: &FileConfig, diags: &mut Vec<String>) -> Resolved {
        match self {
            Scenario::Qrac(a) => {
                Resolved::Qrac(QracRun::resolve(&a.params, &file.qrac.clone().unwrap_or_default(), diags))
            }
            Scenario::PhaseQkd(a) => {
                Resolved::PhaseQkd(PhaseRun::resolve(&a.params, &file.phase_qkd.clone().unwrap_or_default(), diags))
            }
            Scenario::Cow(a) => Resolved::Cow(CowRun::resolve(&a.params, &file.cow.clone().unwrap_or_default(), diags)),
            Scenario::Export(a) => {
                Resolved::Export(ExportRun::resolve(&a.params, &file.export.clone().unwrap_or_default(), diags))
            }
        }
    }
}

fn load(path: &Option<PathBuf>) -> Result<FileConfig, String> {
    path.as_deref().map(FileConfig::load).unwrap_or_else(|| Ok(FileConfig::default()))
}

/// Diagnostics for the sections present in `file`, or for `scenario` alone.
fn validate(file: &FileConfig, scenario: Option<&Scenario>) -> Vec<String> {
    let mut diags = Vec::new();
    let flags = scenario.map(Scenario::solver).cloned().unwrap_or_default();
    SolverRun::resolve(&flags, &file.solver.clone().unwrap_or_default(), &mut diags);
    if let Some(states) = &file.states {
        states.check(&mut diags);
    }
    match scenario {
        Some(s) => {
            s.resolve(file, &mut diags);
        }
        None => {
            if let Some(q) = &file.qrac {
                QracRun::resolve(&QracSection::default(), q, &mut diags);
            }
            if let Some(p) = &file.phase_qkd {
                PhaseRun::resolve(&PhaseSection::default(), p, &mut diags);
            }
            if let Some(c) = &file.cow {
                CowRun::resolve(&CowSection::default(), c, &mut diags);
            }
            if let Some(e) = &file.export {
                ExportRun::resolve(&ExportSection::default(), e, &mut diags);
            }
        }
    }
    diags
}

fn execute(scenario: &Scenario) -> Result<ExitCode, String> {
    let file = load(scenario.config())?;
    let diags = validate(&file, Some(scenario));
    if !diags.is_empty() {
        return Err(diags.join("\n"));
    }
    let mut ignored = Vec::new();
    let solver = SolverRun::resolve(scenario.solver(), &file.solver.clone().unwrap_or_default(), &mut ignored);
    let all_optimal = match scenario.resolve(&file, &mut ignored) {
        Resolved::Qrac(r) => run::qrac(&r, &solver)?,
        Resolved::PhaseQkd(r) => run::phase_qkd(&r, &solver)?,
        Resolved::Cow(r) => run::cow(&r, &solver)?,
        Resolved::Export(r) => {
            run::export(&r)?;
            true
        }
    };
    Ok(if all_optimal { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run(scenario) => execute(&scenario).unwrap_or_else(|e| {
            for line in e.lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(1)
        }),
        Command::Validate(args) => {
            let path = args.scenario.as_ref().and_then(|s| s.config().clone()).or(args.config);
            let diags = match load(&path) {
                Ok(file) => validate(&file, args.scenario.as_ref()),
                Err(e) => vec![e],
            };
            for d in &diags {
                println!("error: {d}");
            }
            if diags.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
