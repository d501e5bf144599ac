use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use zzbwave::grid::AcfVector;
use zzbwave::sim::{monte_carlo_mse, monte_carlo_sweep, NoiseSynth, SimConfig};
use zzbwave::snr::SnrValue;
use zzbwave::spectrum::{crb, dct_forward, make_single_tone_acf, make_sinc_acf};
use zzbwave::waveform_file::WaveformFile;
use zzbwave::zzb::zzb_objective;

use crate::args::{parse_range, snrs_from_db, GridArgs, SimFlags};
use crate::tables::{write_rows, CdfRow, MseRow};
use crate::{Outcome, Status};

pub const MSE_CSV: &str = "mse.csv";
pub const CDF_CSV: &str = "cdf.csv";

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Waveform file, `sinc` or `tone`; repeat to compare several.
    #[arg(long = "waveform", required = true)]
    pub waveforms: Vec<String>,
    /// Operating SNRs in dB as `lo:step:hi`.
    #[arg(long)]
    pub snr_db_range: String,
    /// Also write the absolute-error CDF at this SNR (dB).
    #[arg(long)]
    pub cdf_at_db: Option<f64>,
    /// Grid for the built-in `sinc` and `tone` waveforms.
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimFlags,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// A waveform to evaluate, with the band it was designed for.
pub struct Named {
    pub id: String,
    pub acf: AcfVector,
    pub b_dis: usize,
}

pub fn load_waveform(spec: &str, grid: &GridArgs) -> Result<Named> {
    let built_in = |acf| Ok(Named { id: spec.into(), acf, b_dis: grid.b_dis });
    match spec {
        "sinc" => built_in(make_sinc_acf(grid.grid()?, grid.b_dis)?),
        "tone" => built_in(make_single_tone_acf(grid.grid()?, grid.b_dis)?),
        path => {
            let file = WaveformFile::read(path).with_context(|| format!("cannot load waveform {path}"))?;
            let id = Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .filter(|s| s != "waveform")
                .or_else(|| file.snr_d_db.map(|d| format!("design_{d}db")))
                .unwrap_or_else(|| path.into());
            Ok(Named { id, acf: file.acf()?, b_dis: file.b_dis })
        }
    }
}

pub fn mse_rows(w: &Named, snrs: &[SnrValue], sim: &SimFlags) -> Result<Vec<MseRow>> {
    let method = NoiseSynth::new(&w.acf, sim.noise)?.method();
    let cfg = SimConfig { noise: method, ..sim.config(snrs[0])? };
    let spectrum = dct_forward(&w.acf, w.b_dis)?;
    monte_carlo_sweep(&w.acf, snrs, &cfg)?
        .iter()
        .map(|res| {
            Ok(MseRow {
                snr_db: res.snr.db(),
                waveform_id: w.id.clone(),
                mse: res.mse,
                ci_lo: res.mse_ci95.0,
                ci_hi: res.mse_ci95.1,
                trials: res.trials,
                seed: res.seed,
                zzb: zzb_objective(&w.acf, res.snr),
                crb: crb(&spectrum, res.snr)?,
            })
        })
        .collect()
}

pub fn run(a: &EvalArgs) -> Result<Outcome> {
    let snr_db = parse_range(&a.snr_db_range)?;
    let snrs = snrs_from_db(&snr_db)?;
    let cdf_snr = a.cdf_at_db.map(SnrValue::from_db).transpose()?;
    a.sim.config(snrs[0])?;
    let waveforms = a.waveforms.iter().map(|w| load_waveform(w, &a.grid)).collect::<Result<Vec<_>>>()?;
    for (i, w) in waveforms.iter().enumerate() {
        if waveforms[..i].iter().any(|o| o.id == w.id) {
            bail!("two waveforms share the id `{}`; give the files distinct names", w.id);
        }
    }

    let mut mse = Vec::new();
    let mut cdf = Vec::new();
    for w in &waveforms {
        mse.extend(mse_rows(w, &snrs, &a.sim)?);
        if let Some(snr) = cdf_snr {
            let method = NoiseSynth::new(&w.acf, a.sim.noise)?.method();
            let cfg = SimConfig { noise: method, ..a.sim.config(snr)? };
            let res = monte_carlo_mse(&w.acf, &cfg)?;
            cdf.extend(res.cdf().into_iter().map(|(abs_error, cum_prob)| CdfRow {
                waveform_id: w.id.clone(),
                abs_error,
                cum_prob,
            }));
        }
        eprintln!("evaluated {} at {} SNRs", w.id, snrs.len());
    }

    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    write_rows(&a.out.join(MSE_CSV), &mse)?;
    let mut outputs = vec![MSE_CSV.to_string()];
    if cdf_snr.is_some() {
        write_rows(&a.out.join(CDF_CSV), &cdf)?;
        outputs.push(CDF_CSV.into());
    }
    Ok(Outcome { status: Status::Ok, outputs })
}
