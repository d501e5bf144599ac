//! SNR-adaptive waveform banks.
//!
//! A bank holds one ZZB-optimal design per design SNR and a table of their
//! simulated ranging MSE over a grid of operating SNRs. All entries are
//! simulated with the same seed, so every cell of a column sees the same
//! true distances and noise draws, which keeps comparisons between entries
//! sharp.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::AcfVector;
use crate::optimizer::{design_waveform, DesignConfig, StopReason};
use crate::sim::{monte_carlo_sweep, NoiseMethod, NoiseSynth, SimConfig, SimResult};
use crate::snr::SnrValue;
use crate::waveform_file::{WaveformFile, WaveformMeta};
use crate::zzb::zzb_objective;

/// Operating SNRs closer than this (in dB) to a table column count as on it.
const SNR_MATCH_DB: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BankEntry {
    pub snr_d: SnrValue,
    pub b_dis: usize,
    pub waveform: AcfVector,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub sigma: f64,
}

impl BankEntry {
    /// Non-converged designs stay in the bank for inspection but are never
    /// selected.
    pub fn selectable(&self) -> bool {
        self.converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseCell {
    pub mse: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl From<&SimResult> for MseCell {
    fn from(r: &SimResult) -> Self {
        Self { mse: r.mse, ci_lo: r.mse_ci95.0, ci_hi: r.mse_ci95.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformBank {
    /// Sorted by ascending design SNR.
    pub entries: Vec<BankEntry>,
    pub operating: Vec<SnrValue>,
    /// `mse_table[entry][snr]`.
    pub mse_table: Vec<Vec<MseCell>>,
    /// Noise method actually used for each entry.
    pub noise_methods: Vec<NoiseMethod>,
    pub trials: usize,
    pub seed: u64,
}

/// Designs one waveform per design SNR, each started from `init`.
///
/// The returned entries are sorted by design SNR. Design SNRs closer than
/// 1e-9 dB are rejected as duplicates.
pub fn design_bank(snr_d_list: &[SnrValue], template: &DesignConfig, init: &AcfVector) -> Result<Vec<BankEntry>> {
    if snr_d_list.is_empty() {
        return Err(invalid("design SNR list is empty"));
    }
    let mut snrs = snr_d_list.to_vec();
    snrs.sort_by(|a, b| a.linear().total_cmp(&b.linear()));
    if snrs.windows(2).any(|w| (w[1].db() - w[0].db()).abs() < SNR_MATCH_DB) {
        return Err(invalid("design SNR list contains duplicates"));
    }
    snrs.iter()
        .map(|&snr_d| {
            let cfg = DesignConfig { snr_d, ..*template };
            let res = design_waveform(&cfg, init)?;
            Ok(BankEntry {
                snr_d,
                b_dis: cfg.b_dis,
                waveform: res.waveform,
                objective: res.objective,
                iterations: res.iterations,
                converged: res.converged,
                stop_reason: res.stop_reason,
                sigma: res.sigma,
            })
        })
        .collect()
}

/// Simulates every entry over `operating` with common random numbers.
pub fn simulate_bank(
    entries: Vec<BankEntry>,
    operating: &[SnrValue],
    sim: &SimConfig,
) -> Result<WaveformBank> {
    let first = entries.first().ok_or(Error::EmptyBank)?;
    if operating.is_empty() {
        return Err(invalid("operating SNR grid is empty"));
    }
    let grid = *first.waveform.grid();
    if entries.iter().any(|e| e.waveform.grid() != &grid) {
        return Err(invalid("bank entries must share one grid"));
    }
    let mut mse_table = Vec::with_capacity(entries.len());
    let mut noise_methods = Vec::with_capacity(entries.len());
    for e in &entries {
        let method = NoiseSynth::new(&e.waveform, sim.noise)?.method();
        let cfg = SimConfig { noise: method, ..*sim };
        let results = monte_carlo_sweep(&e.waveform, operating, &cfg)?;
        mse_table.push(results.iter().map(MseCell::from).collect());
        noise_methods.push(method);
    }
    Ok(WaveformBank {
        entries,
        operating: operating.to_vec(),
        mse_table,
        noise_methods,
        trials: sim.trials,
        seed: sim.seed,
    })
}

/// [`design_bank`] followed by [`simulate_bank`].
pub fn build_bank(
    snr_d_list: &[SnrValue],
    design: &DesignConfig,
    init: &AcfVector,
    operating: &[SnrValue],
    sim: &SimConfig,
) -> Result<WaveformBank> {
    simulate_bank(design_bank(snr_d_list, design, init)?, operating, sim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Lowest simulated MSE at the operating SNR.
    #[default]
    Mse,
    /// Lowest ZZB at the operating SNR.
    Zzb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub entry: usize,
    /// Table column used for the lookup.
    pub column: usize,
    /// The operating SNR was not on the table grid and the nearest column
    /// was used instead.
    pub nearest: bool,
}

impl WaveformBank {
    pub fn column_of(&self, snr: SnrValue) -> (usize, bool) {
        let (col, dist) = self
            .operating
            .iter()
            .map(|s| (s.db() - snr.db()).abs())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("operating grid is never empty");
        (col, dist > SNR_MATCH_DB)
    }

    fn selectable(&self) -> impl Iterator<Item = (usize, &BankEntry)> {
        self.entries.iter().enumerate().filter(|(_, e)| e.selectable())
    }

    /// Picks the best selectable entry at `snr`. Ties go to the lower design
    /// SNR.
    pub fn select(&self, snr: SnrValue, mode: SelectionMode) -> Result<Selection> {
        let (column, nearest) = self.column_of(snr);
        let score = |i: usize, e: &BankEntry| match mode {
            SelectionMode::Mse => self.mse_table[i][column].mse,
            SelectionMode::Zzb => zzb_objective(&e.waveform, snr),
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.selectable() {
            let v = score(i, e);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        let (entry, _) = best.ok_or(Error::EmptyBank)?;
        Ok(Selection { entry, column, nearest })
    }

    /// Best entry and its MSE at every operating SNR.
    pub fn envelope(&self) -> Result<Vec<(usize, MseCell)>> {
        self.operating
            .iter()
            .map(|&snr| {
                let s = self.select(snr, SelectionMode::Mse)?;
                Ok((s.entry, self.mse_table[s.entry][s.column]))
            })
            .collect()
    }

    /// Lowest operating SNR at which `entry` is the MSE selection.
    pub fn first_optimal_snr(&self, entry: usize) -> Result<Option<SnrValue>> {
        for (col, &snr) in self.operating.iter().enumerate() {
            if self.select(snr, SelectionMode::Mse)?.entry == entry {
                return Ok(Some(self.operating[col]));
            }
        }
        Ok(None)
    }
}

pub const BANK_INDEX: &str = "bank.json";
pub const MSE_TABLE: &str = "mse_table.csv";

#[derive(Debug, Serialize, Deserialize)]
struct IndexEntry {
    file: String,
    /// Linear; `snr_d_db` is informational.
    snr_d: SnrValue,
    snr_d_db: f64,
    stop_reason: StopReason,
    noise_method: NoiseMethod,
}

#[derive(Debug, Serialize, Deserialize)]
struct BankIndex {
    version: u32,
    trials: usize,
    seed: u64,
    /// Linear operating SNRs, one per table column.
    operating: Vec<SnrValue>,
    entries: Vec<IndexEntry>,
}

/// One row of `mse_table.csv`.
#[derive(Debug, Serialize, Deserialize)]
struct TableRow {
    entry: usize,
    snr_d_db: f64,
    column: usize,
    operating_snr_db: f64,
    mse: f64,
    ci_lo: f64,
    ci_hi: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("{MSE_TABLE}: {e}"))
}

impl WaveformBank {
    /// Writes one waveform file per entry, [`BANK_INDEX`] and [`MSE_TABLE`]
    /// into `dir`, creating it if needed. Returns the paths written.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut index = BankIndex {
            version: 1,
            trials: self.trials,
            seed: self.seed,
            operating: self.operating.clone(),
            entries: Vec::new(),
        };
        for (i, (e, &method)) in self.entries.iter().zip(&self.noise_methods).enumerate() {
            let file = format!("entry_{i:03}.json");
            let meta = WaveformMeta {
                objective: Some(e.objective),
                iterations: Some(e.iterations),
                converged: Some(e.converged),
                sigma: Some(e.sigma),
            };
            let path = dir.join(&file);
            WaveformFile::from_acf(&e.waveform, e.b_dis, Some(e.snr_d.db()), meta).write(&path)?;
            written.push(path);
            index.entries.push(IndexEntry {
                file,
                snr_d: e.snr_d,
                snr_d_db: e.snr_d.db(),
                stop_reason: e.stop_reason,
                noise_method: method,
            });
        }
        let path = dir.join(BANK_INDEX);
        fs::write(&path, serde_json::to_string_pretty(&index)?)?;
        written.push(path);

        let path = dir.join(MSE_TABLE);
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        for (entry, (e, row)) in self.entries.iter().zip(&self.mse_table).enumerate() {
            for (column, (snr, c)) in self.operating.iter().zip(row).enumerate() {
                w.serialize(TableRow {
                    entry,
                    snr_d_db: e.snr_d.db(),
                    column,
                    operating_snr_db: snr.db(),
                    mse: c.mse,
                    ci_lo: c.ci_lo,
                    ci_hi: c.ci_hi,
                })
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
        written.push(path);
        Ok(written)
    }

    /// Reads a bank written by [`WaveformBank::save`].
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let index: BankIndex = serde_json::from_str(&fs::read_to_string(dir.join(BANK_INDEX))?)?;
        if index.version != 1 {
            return Err(Error::Format(format!("{BANK_INDEX}: unsupported version {}", index.version)));
        }
        let mut entries = Vec::with_capacity(index.entries.len());
        let mut noise_methods = Vec::with_capacity(index.entries.len());
        for ie in &index.entries {
            let f = WaveformFile::read(dir.join(&ie.file))?;
            let missing = |what: &str| Error::Format(format!("{}: meta.{what} is missing", ie.file));
            entries.push(BankEntry {
                snr_d: ie.snr_d,
                b_dis: f.b_dis,
                waveform: f.acf()?,
                objective: f.meta.objective.ok_or_else(|| missing("objective"))?,
                iterations: f.meta.iterations.ok_or_else(|| missing("iterations"))?,
                converged: f.meta.converged.ok_or_else(|| missing("converged"))?,
                stop_reason: ie.stop_reason,
                sigma: f.meta.sigma.ok_or_else(|| missing("sigma"))?,
            });
            noise_methods.push(ie.noise_method);
        }
        let cols = index.operating.len();
        let mut table: Vec<Vec<Option<MseCell>>> = vec![vec![None; cols]; entries.len()];
        let mut rdr = csv::Reader::from_path(dir.join(MSE_TABLE)).map_err(csv_err)?;
        for row in rdr.deserialize() {
            let row: TableRow = row.map_err(csv_err)?;
            let slot = table
                .get_mut(row.entry)
                .and_then(|r| r.get_mut(row.column))
                .ok_or_else(|| Error::Format(format!("{MSE_TABLE}: cell ({}, {}) out of range", row.entry, row.column)))?;
            *slot = Some(MseCell { mse: row.mse, ci_lo: row.ci_lo, ci_hi: row.ci_hi });
        }
        let mse_table = table
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, c)| c.ok_or_else(|| Error::Format(format!("{MSE_TABLE}: cell ({i}, {j}) missing"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries, operating: index.operating, mse_table, noise_methods, trials: index.trials, seed: index.seed })
    }
}

/// Free-function form of [`WaveformBank::select`].
pub fn select_waveform(bank: &WaveformBank, snr: SnrValue, mode: SelectionMode) -> Result<Selection> {
    bank.select(snr, mode)
}
