// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod adaptive;
mod args;
mod design;
mod eval;
mod manifest;
mod plot;
mod svg;
mod tables;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use manifest::{RunManifest, MANIFEST};

/// Waveform design by Ziv-Zakai bound minimization, with Monte Carlo ranging
/// evaluation and SNR-adaptive banks.
#[derive(Debug, Parser)]
#[command(name = "zzbwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Cli2,
}

#[derive(Debug, Subcommand)]
enum Cli2 {
    #[command(flatten)]
    Run(Command),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Design a ZZB-optimal waveform at one design SNR.
    Design(design::DesignArgs),
    /// Simulate ranging MSE (and optionally error CDFs) over an SNR range.
    Eval(eval::EvalArgs),
    /// Build a bank of designs and its MSE-adaptive envelope.
    Adaptive(adaptive::AdaptiveArgs),
    /// Render a CSV or waveform file as SVG.
    Plot(plot::PlotArgs),
}

#[derive(Debug, clap::Args)]
struct ReplayArgs {
    /// Manifest written by an earlier run.
    manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    /// An iteration budget ran out; outputs are still written.
    Budget = 2,
}

/// What a command produced.
pub struct Outcome {
    pub status: Status,
    /// Output files relative to the manifest directory.
    pub outputs: Vec<String>,
}

impl Command {
    fn seed_mut(&mut self) -> Option<&mut Option<u64>> {
        match self {
            Command::Eval(a) => Some(&mut a.sim.seed),
            Command::Adaptive(a) => Some(&mut a.sim.seed),
            _ => None,
        }
    }

    /// Fills in values taken from the environment so the recorded command
    /// no longer depends on it.
    fn resolve(&mut self) -> Result<()> {
        if let Some(seed) = self.seed_mut() {
            if seed.is_none() {
                *seed = Some(args::seed_from_env()?);
            }
        }
        Ok(())
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Eval(a) => a.sim.seed,
            Command::Adaptive(a) => a.sim.seed,
            _ => None,
        }
    }

    /// Directory holding the outputs and the manifest, and the manifest's
    /// file name.
    fn manifest_location(&self) -> (PathBuf, String) {
        match self {
            Command::Design(a) => (a.out.clone(), MANIFEST.into()),
            Command::Eval(a) => (a.out.clone(), MANIFEST.into()),
            Command::Adaptive(a) => (a.out.clone(), MANIFEST.into()),
            Command::Plot(a) => {
                let dir = a.out.parent().map(Path::to_path_buf).unwrap_or_default();
                let stem = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (dir, format!("{stem}.{MANIFEST}"))
            }
        }
    }

    fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Design(a) => a.out = out,
            Command::Eval(a) => a.out = out,
            Command::Adaptive(a) => a.out = out,
            Command::Plot(a) => a.out = out,
        }
    }

    fn execute(&self) -> Result<Outcome> {
        match self {
            Command::Design(a) => design::run(a),
            Command::Eval(a) => eval::run(a),
            Command::Adaptive(a) => adaptive::run(a),
            Command::Plot(a) => plot::run(a),
        }
    }
}

fn run_recorded(mut cmd: Command) -> Result<Status> {
    cmd.resolve()?;
    let start = Instant::now();
    let outcome = cmd.execute()?;
    let (dir, name) = cmd.manifest_location();
    let manifest = RunManifest {
        seed: cmd.seed(),
        command: cmd,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        outputs: outcome.outputs,
        exit_code: outcome.status as i32,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    manifest.write_as(&dir, &name)?;
    Ok(outcome.status)
}

fn replay(a: &ReplayArgs) -> Result<Status> {
    let m = RunManifest::read(&a.manifest)?;
    let mut cmd = m.command;
    if let Some(out) = &a.out {
        cmd.set_out(out.clone());
    }
    run_recorded(cmd).with_context(|| format!("replaying {}", a.manifest.display()))
}

/// Numerical breakdowns exit with 3; everything else that fails is a usage
/// or input problem.
fn exit_code(e: &anyhow::Error) -> u8 {
    use zzbwave::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::DegenerateSpectrum | E::Covariance { .. } | E::NonFinite { .. } | E::ProjectionStalled { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Cli2::Run(cmd) => run_recorded(cmd),
        Cli2::Replay(a) => replay(&a),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
