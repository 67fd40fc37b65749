//! Batch simulation: TOML-configured sweeps over speed and SNR, CSV
//! emission, and transform-complexity reports.
//!
//! The harness is deliberately thin glue over [`crate::controller`]: it
//! expands a config into independent (speed, SNR) cells, runs each cell's
//! blocks under seeds derived from the master seed, and serializes the
//! aggregate rows. Nothing in here touches signal processing.

pub mod complexity;
pub mod config;
pub mod csv;
pub mod sweep;

pub use complexity::{count_ops_report, ComplexityEntry, ComplexityReport};
pub use config::{load_config, parse_config, SensingSettings, SimConfig, WaveformMode};
pub use csv::{emit_csv, parse_csv, write_csv};
pub use sweep::{run_ber_sweep, BerRow};
