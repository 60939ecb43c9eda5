//! Monte Carlo sweeps over detectors and SNR, with CSV output.

mod config;
mod csv_io;
mod sweep;

pub use config::{preset, ConfigFile, DetectorKind, KBestSection, Preset, PsedSection, PsedSettings, SweepConfig, PRESETS};
pub use csv_io::{emit_csv, emit_mse_csv, fmt_float, load_csv, read_csv, write_csv, write_flagged_log, write_mse_csv, HEADER};
pub use sweep::{run_mse_curves, run_sweep, snr_at_ser, trial_instance, AnalyticPoint, FlaggedTrial, MseCurves, SweepResult, SweepRow};
