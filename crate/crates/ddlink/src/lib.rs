//! Link-level simulation toolkit for OFDM and delay-Doppler (OTFS)
//! waveforms over time-varying multipath channels.
//!
//! The crate models one wireless link end to end:
//!
//! * [`params`] / [`grid`] / [`transforms`] / [`qam`] — frame geometry,
//!   the delay-Doppler and time-frequency containers, the unitary
//!   transform pair between them, and Gray-coded QAM mapping.
//! * [`ofdm`] — cyclic-prefix OFDM modulation, demodulation, and one-tap
//!   zero-forcing equalization.
//! * [`otfs`] — delay-Doppler modulation layered on the OFDM engine, the
//!   probed effective channel matrix, and LMMSE detection.
//! * [`channel`] — linear time-varying multipath propagation with per-path
//!   Doppler, tapped-delay-line profiles, and AWGN.
//! * [`sensing`] — matched-filter acquisition on the delay-Doppler grid
//!   plus Fibonacci-section refinement for fractional delay/Doppler, and
//!   radial-speed estimation from round-trip echoes.
//! * [`controller`] — speed-adaptive waveform selection (OFDM below a
//!   speed threshold, OTFS above) driving a shared data path.
//! * [`harness`] — seeded Monte Carlo BER sweeps, CSV emission, and
//!   transform-complexity reports.
//!
//! Everything is deterministic under a caller-supplied seed; see [`seed`]
//! for how independent streams are derived from it.

pub mod channel;
pub mod controller;
pub mod error;
pub mod grid;
pub mod harness;
pub mod ofdm;
pub mod ops;
pub mod otfs;
pub mod params;
pub mod qam;
pub mod seed;
pub mod sensing;
pub mod transforms;

mod fft;

pub use error::{Error, Result};

// ─────────────────────────────────────────────────────────────────────────
