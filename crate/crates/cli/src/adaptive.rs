use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use zzbwave::bank::{design_bank, simulate_bank};
use zzbwave::sim::{monte_carlo_sweep, NoiseSynth, SimConfig};
use zzbwave::snr::SnrValue;
use zzbwave::spectrum::make_sinc_acf;

use crate::args::{parse_list, parse_range, snrs_from_db, DesignFlags, GridArgs, SimFlags};
use crate::tables::{write_rows, EnvelopeRow};
use crate::{Outcome, Status};

pub const BANK_DIR: &str = "bank";
pub const ENVELOPE_CSV: &str = "adaptive_envelope.csv";

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct AdaptiveArgs {
    /// Design SNRs in dB, comma separated.
    #[arg(long, conflicts_with = "snr_d_grid")]
    pub snr_d_list: Option<String>,
    /// Design SNRs in dB as `lo:step:hi` (default 8:1:30).
    #[arg(long)]
    pub snr_d_grid: Option<String>,
    /// Operating SNRs in dB as `lo:step:hi`.
    #[arg(long, default_value = "0:1:30")]
    pub snr_db_range: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub design: DesignFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimFlags,
    /// Start point for every design: `sinc` or `file:<waveform.json>`.
    #[arg(long, default_value = "sinc")]
    pub init: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl AdaptiveArgs {
    fn design_snrs(&self) -> Result<Vec<SnrValue>> {
        let db = match (&self.snr_d_list, &self.snr_d_grid) {
            (Some(list), _) => parse_list(list).context("--snr-d-list")?,
            (None, Some(grid)) => parse_range(grid).context("--snr-d-grid")?,
            (None, None) => parse_range("8:1:30")?,
        };
        snrs_from_db(&db)
    }
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).to_string_lossy().into_owned()
}

pub fn run(a: &AdaptiveArgs) -> Result<Outcome> {
    let design_snrs = a.design_snrs()?;
    let operating = snrs_from_db(&parse_range(&a.snr_db_range)?)?;
    let sim = a.sim.config(operating[0])?;
    let template = a.design.config(design_snrs[0], a.grid.b_dis)?;
    let init = crate::design::initial_point(&a.init, &a.grid)?;

    let entries = design_bank(&design_snrs, &template, &init)?;
    for e in &entries {
        eprintln!(
            "entry {:.2} dB: objective {:.6e} after {} iterations ({:?})",
            e.snr_d.db(),
            e.objective,
            e.iterations,
            e.stop_reason
        );
    }
    let all_converged = entries.iter().all(|e| e.converged);
    let bank = simulate_bank(entries, &operating, &sim)?;

    let sinc = make_sinc_acf(a.grid.grid()?, a.grid.b_dis)?;
    let sinc_cfg = SimConfig { noise: NoiseSynth::new(&sinc, sim.noise)?.method(), ..sim };
    let sinc_res = monte_carlo_sweep(&sinc, &operating, &sinc_cfg)?;

    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mut outputs: Vec<String> =
        bank.save(a.out.join(BANK_DIR))?.iter().map(|p| relative(p, &a.out)).collect();

    if !bank.entries.iter().any(|e| e.selectable()) {
        eprintln!("no bank entry converged; {ENVELOPE_CSV} not written");
        return Ok(Outcome { status: Status::Budget, outputs });
    }
    let rows: Vec<EnvelopeRow> = bank
        .envelope()?
        .into_iter()
        .zip(&operating)
        .zip(&sinc_res)
        .map(|(((entry, cell), snr), s)| EnvelopeRow {
            snr_db: snr.db(),
            entry,
            snr_d_db: bank.entries[entry].snr_d.db(),
            mse: cell.mse,
            ci_lo: cell.ci_lo,
            ci_hi: cell.ci_hi,
            sinc_mse: s.mse,
            sinc_ci_lo: s.mse_ci95.0,
            sinc_ci_hi: s.mse_ci95.1,
        })
        .collect();
    write_rows(&a.out.join(ENVELOPE_CSV), &rows)?;
    outputs.push(ENVELOPE_CSV.into());

    let status = if all_converged { Status::Ok } else { Status::Budget };
    Ok(Outcome { status, outputs })
}
