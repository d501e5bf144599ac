// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bank;
pub mod dct;
pub mod error;
pub mod grid;
pub mod optimizer;
pub mod projection;
pub mod sim;
pub mod snr;
pub mod spectrum;
pub mod waveform_file;
pub mod zzb;

pub use error::{Error, Result};
