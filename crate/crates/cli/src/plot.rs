use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use zzbwave::waveform_file::WaveformFile;

use crate::svg::{Figure, Series, Style};
use crate::tables::{read_rows, CdfRow, EnvelopeRow, MseRow, CDF_COLUMNS, ENVELOPE_COLUMNS, MSE_COLUMNS};
use crate::{Outcome, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// `mse.csv`: MSE, ZZB and CRB against SNR.
    Mse,
    /// `cdf.csv`: absolute-error CDFs.
    Cdf,
    /// `adaptive_envelope.csv`: adaptive MSE against sinc.
    Envelope,
    /// Waveform files: normalized power per frequency bin.
    Psd,
    /// Waveform files: ACF against lag.
    Acf,
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Input CSV (or waveform JSON for psd/acf); repeat to overlay.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Logarithmic y axis (default on for mse and envelope).
    #[arg(long)]
    pub log_y: Option<bool>,
    #[arg(long)]
    pub title: Option<String>,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
}

/// Groups `(key, point)` pairs by key, keeping first-appearance order.
fn grouped<K: PartialEq + Clone>(items: impl IntoIterator<Item = (K, (f64, f64))>) -> Vec<(K, Vec<(f64, f64)>)> {
    let mut out: Vec<(K, Vec<(f64, f64)>)> = Vec::new();
    for (k, p) in items {
        match out.iter_mut().find(|(g, _)| *g == k) {
            Some((_, pts)) => pts.push(p),
            None => out.push((k, vec![p])),
        }
    }
    out
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn waveform_label(path: &Path, f: &WaveformFile) -> String {
    match f.snr_d_db {
        Some(d) => format!("{} ({d} dB)", stem(path)),
        None => stem(path),
    }
}

fn series(kind: PlotKind, inputs: &[PathBuf]) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for path in inputs {
        match kind {
            PlotKind::Mse => {
                let rows: Vec<MseRow> = read_rows(path, MSE_COLUMNS)?;
                for (id, _) in grouped(rows.iter().map(|r| (r.waveform_id.clone(), (0.0, 0.0)))) {
                    let pick = |f: fn(&MseRow) -> f64| {
                        rows.iter().filter(|r| r.waveform_id == id).map(|r| (r.snr_db, f(r))).collect()
                    };
                    out.push(Series { name: format!("{id} mse"), points: pick(|r| r.mse), style: Style::Line });
                    out.push(Series { name: format!("{id} zzb"), points: pick(|r| r.zzb), style: Style::Dashed });
                    out.push(Series { name: format!("{id} crb"), points: pick(|r| r.crb), style: Style::Dashed });
                }
            }
            PlotKind::Cdf => {
                let rows: Vec<CdfRow> = read_rows(path, CDF_COLUMNS)?;
                for (id, points) in grouped(rows.into_iter().map(|r| (r.waveform_id, (r.abs_error, r.cum_prob)))) {
                    out.push(Series { name: id, points, style: Style::Steps });
                }
            }
            PlotKind::Envelope => {
                let rows: Vec<EnvelopeRow> = read_rows(path, ENVELOPE_COLUMNS)?;
                out.push(Series {
                    name: "adaptive".into(),
                    points: rows.iter().map(|r| (r.snr_db, r.mse)).collect(),
                    style: Style::Line,
                });
                out.push(Series {
                    name: "sinc".into(),
                    points: rows.iter().map(|r| (r.snr_db, r.sinc_mse)).collect(),
                    style: Style::Dashed,
                });
            }
            PlotKind::Psd | PlotKind::Acf => {
                let f = WaveformFile::read(path).with_context(|| format!("cannot load waveform {}", path.display()))?;
                let grid = f.grid()?;
                let points = if kind == PlotKind::Psd {
                    let band = &f.spectrum[..f.b_dis.min(f.spectrum.len())];
                    let total: f64 = band.iter().map(|p| p.max(0.0)).sum();
                    if !(total > 0.0) {
                        bail!("{}: spectrum carries no power", path.display());
                    }
                    band.iter().enumerate().map(|(k, p)| (grid.freq(k), p.max(0.0) / total)).collect()
                } else {
                    f.r.iter().enumerate().map(|(i, &r)| (grid.point(i), r)).collect()
                };
                let style = if kind == PlotKind::Psd { Style::Bars } else { Style::Line };
                out.push(Series { name: waveform_label(path, &f), points, style });
            }
        }
    }
    Ok(out)
}

pub fn run(a: &PlotArgs) -> Result<Outcome> {
    let series = series(a.kind, &a.inputs)?;
    let (title, x_label, y_label) = match a.kind {
        PlotKind::Mse => ("Ranging MSE and bounds", "SNR (dB)", "MSE"),
        PlotKind::Cdf => ("Absolute error CDF", "|error|", "P(|e| <= x)"),
        PlotKind::Envelope => ("Adaptive bank envelope", "SNR (dB)", "MSE"),
        PlotKind::Psd => ("Power spectral density", "frequency", "normalized power"),
        PlotKind::Acf => ("Autocorrelation", "lag", "R"),
    };
    let fig = Figure {
        title: a.title.clone().unwrap_or_else(|| title.into()),
        x_label: x_label.into(),
        y_label: y_label.into(),
        log_y: a.log_y.unwrap_or(matches!(a.kind, PlotKind::Mse | PlotKind::Envelope)),
        series,
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(&a.out, fig.render()).with_context(|| format!("cannot write {}", a.out.display()))?;
    let name = a.out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Outcome { status: Status::Ok, outputs: vec![name] })
}
