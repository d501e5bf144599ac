use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use zzbwave::grid::AcfVector;
use zzbwave::optimizer::design_waveform;
use zzbwave::snr::SnrValue;
use zzbwave::spectrum::make_sinc_acf;
use zzbwave::waveform_file::{WaveformFile, WaveformMeta};

use crate::args::{DesignFlags, GridArgs};
use crate::tables::write_rows;
use crate::{Outcome, Status};

pub const WAVEFORM: &str = "waveform.json";
pub const TRACE: &str = "trace.csv";

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct DesignArgs {
    /// Design SNR in dB.
    #[arg(long)]
    pub snr_d_db: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub design: DesignFlags,
    /// Start point: `sinc` or `file:<waveform.json>`.
    #[arg(long, default_value = "sinc")]
    pub init: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Resolves `--init` against the requested grid.
pub fn initial_point(init: &str, grid: &GridArgs) -> Result<AcfVector> {
    let g = grid.grid()?;
    if init == "sinc" {
        return Ok(make_sinc_acf(g, grid.b_dis)?);
    }
    let Some(path) = init.strip_prefix("file:") else { bail!("--init must be `sinc` or `file:<path>`, got `{init}`") };
    let file = WaveformFile::read(path).with_context(|| format!("cannot load start point {path}"))?;
    let r = file.acf()?;
    if r.grid() != &g {
        bail!(
            "start point {path} has n = {}, eps_max = {} but the run uses n = {}, eps_max = {}",
            file.n,
            file.eps_max,
            grid.n,
            grid.eps_max
        );
    }
    Ok(r)
}

pub fn run(a: &DesignArgs) -> Result<Outcome> {
    let snr_d = SnrValue::from_db(a.snr_d_db)?;
    let cfg = a.design.config(snr_d, a.grid.b_dis)?;
    let r0 = initial_point(&a.init, &a.grid)?;
    let res = design_waveform(&cfg, &r0)?;

    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let meta = WaveformMeta {
        objective: Some(res.objective),
        iterations: Some(res.iterations),
        converged: Some(res.converged),
        sigma: Some(res.sigma),
    };
    WaveformFile::from_acf(&res.waveform, a.grid.b_dis, Some(a.snr_d_db), meta).write(a.out.join(WAVEFORM))?;
    write_rows(&a.out.join(TRACE), &res.trace)?;

    eprintln!(
        "design at {} dB: objective {:.6e} after {} iterations ({:?})",
        a.snr_d_db, res.objective, res.iterations, res.stop_reason
    );
    let status = if res.converged { Status::Ok } else { Status::Budget };
    Ok(Outcome { status, outputs: vec![WAVEFORM.into(), TRACE.into()] })
}
