//! TOML sweep configuration.
//!
//! Every key has a default matching the crate's reference link (16
//! subcarriers at 15 kHz, 8 symbols, 0.95 GHz carrier, vehicular channel,
//! speeds from walking to rail), so an empty file is a valid, meaningful
//! configuration and a shipped config only needs to spell out what it
//! changes. Unknown keys are rejected: a typo silently falling back to a
//! default would invalidate a sweep without any visible sign.
//!
//! Validation distinguishes shape errors (bad TOML, unknown waveform
//! names, missing hybrid threshold) from physics errors (cyclic prefix
//! shorter than the channel's delay spread); both surface as
//! [`Error::Config`] so binaries can map them to a dedicated exit code.

use serde::Deserialize;
use std::path::Path;

use crate::channel::{Profile, Tap};
use crate::controller::WaveformChoice;
use crate::error::{Error, Result};
use crate::params::LinkParams;
use crate::qam::Modulation;
use crate::sensing::SensingOptions;

/// Statistical floor for BER cells: below this many bits per cell the
/// estimate is too noisy to compare curves.
pub const MIN_BITS_FLOOR: u64 = 10_000;

// ── Raw TOML shape ──────────────────────────────────────────────────────

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    link: RawLink,
    scenario: RawScenario,
    sensing: RawSensing,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawLink {
    m: usize,
    n: usize,
    delta_f_hz: f64,
    f_c_hz: f64,
    /// Defaults to the smallest prefix covering the channel profile's
    /// delay spread.
    cp_len: Option<usize>,
}

impl Default for RawLink {
    fn default() -> Self {
        RawLink { m: 16, n: 8, delta_f_hz: 15e3, f_c_hz: 0.95e9, cp_len: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawScenario {
    waveform: String,
    speeds_kmh: Vec<f64>,
    snr_db: Vec<f64>,
    mod_order: u32,
    channel: String,
    taps: Option<Vec<RawTap>>,
    frames: usize,
    min_bits: u64,
    seed: u64,
    threshold_kmh: Option<f64>,
    noiseless: bool,
}

impl Default for RawScenario {
    fn default() -> Self {
        RawScenario {
            waveform: "hybrid".to_string(),
            speeds_kmh: vec![3.0, 10.0, 30.0, 200.0, 500.0],
            snr_db: vec![0.0, 5.0, 10.0, 15.0],
            mod_order: 4,
            channel: "eva".to_string(),
            taps: None,
            frames: 1,
            min_bits: MIN_BITS_FLOOR,
            seed: 7,
            threshold_kmh: None,
            noiseless: false,
        }
    }
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct RawTap {
    delay_ns: f64,
    power_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSensing {
    snr_db: f64,
    target_range_m: f64,
    tol_bins: f64,
    stop_ratio: f64,
    max_targets: usize,
}

impl Default for RawSensing {
    fn default() -> Self {
        RawSensing { snr_db: 20.0, target_range_m: 100.0, tol_bins: 1e-3, stop_ratio: 0.1, max_targets: 4 }
    }
}

// ── Resolved configuration ──────────────────────────────────────────────

/// Sweep waveform mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveformMode {
    Fixed(WaveformChoice),
    /// Adaptive selection with the given speed threshold.
    Hybrid { threshold_kmh: f64 },
}

/// Settings of the sensing phase used by hybrid sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingSettings {
    pub snr_db: f64,
    pub target_range_m: f64,
    pub tol_bins: f64,
    pub stop_ratio: f64,
    pub max_targets: usize,
}

impl SensingSettings {
    /// View as the sensing module's option set.
    pub fn options(&self) -> SensingOptions {
        SensingOptions {
            tol_bins: self.tol_bins,
            stop_ratio: self.stop_ratio,
            max_targets: self.max_targets,
        }
    }
}

/// A fully validated sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: LinkParams,
    pub mode: WaveformMode,
    pub speeds_kmh: Vec<f64>,
    /// SNR points of the sweep; the single value `f64::INFINITY` when the
    /// scenario is noiseless.
    pub snrs_db: Vec<f64>,
    pub modulation: Modulation,
    pub profile: Profile,
    /// Data frames per channel realization.
    pub frames: usize,
    /// Minimum payload bits per (speed, SNR) cell.
    pub min_bits: u64,
    pub seed: u64,
    pub sensing: SensingSettings,
}

impl SimConfig {
    /// Replaces the SNR sweep with a single noiseless point.
    pub fn make_noiseless(&mut self) {
        self.snrs_db = vec![f64::INFINITY];
    }
}

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
    resolve(raw)
}

/// Reads, parses, and validates a TOML configuration file.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn resolve(raw: RawConfig) -> Result<SimConfig> {
    let profile = match raw.scenario.channel.as_str() {
        "eva" => {
            if raw.scenario.taps.is_some() {
                return config_err("[scenario] taps are only valid with channel = \"custom\"");
            }
            Profile::Eva
        }
        "single_path" => {
            if raw.scenario.taps.is_some() {
                return config_err("[scenario] taps are only valid with channel = \"custom\"");
            }
            Profile::SinglePath
        }
        "custom" => {
            let taps = match raw.scenario.taps {
                Some(t) if !t.is_empty() => t,
                _ => return config_err("[scenario] channel = \"custom\" requires at least one [[scenario.taps]] entry"),
            };
            Profile::Custom(
                taps.iter().map(|t| Tap { delay_ns: t.delay_ns, power_db: t.power_db }).collect(),
            )
        }
        other => {
            return config_err(format!(
                "[scenario] unknown channel {other:?}; expected \"eva\", \"single_path\", or \"custom\""
            ))
        }
    };

    // Prefix defaulting needs the sample period, which does not depend on
    // the prefix itself.
    let probe = LinkParams::new(raw.link.m, raw.link.n, raw.link.delta_f_hz, raw.link.f_c_hz, 0)
        .map_err(|e| Error::Config(format!("[link] {e}")))?;
    let min_cp = profile.min_cp_len(&probe);
    let cp_len = raw.link.cp_len.unwrap_or(min_cp);
    if cp_len < min_cp {
        return config_err(format!(
            "[link] cp_len = {cp_len} is shorter than the channel delay spread; this profile needs at least {min_cp}"
        ));
    }
    let params = LinkParams::new(raw.link.m, raw.link.n, raw.link.delta_f_hz, raw.link.f_c_hz, cp_len)
        .map_err(|e| Error::Config(format!("[link] {e}")))?;

    let mode = match raw.scenario.waveform.as_str() {
        "ofdm" | "otfs" => {
            if raw.scenario.threshold_kmh.is_some() {
                return config_err("[scenario] threshold_kmh is only valid with waveform = \"hybrid\"");
            }
            if raw.scenario.waveform == "ofdm" {
                WaveformMode::Fixed(WaveformChoice::Ofdm)
            } else {
                WaveformMode::Fixed(WaveformChoice::Otfs)
            }
        }
        "hybrid" => {
            let threshold_kmh = raw.scenario.threshold_kmh.unwrap_or(120.0);
            if !threshold_kmh.is_finite() || threshold_kmh < 0.0 {
                return config_err(format!(
                    "[scenario] threshold_kmh must be finite and >= 0, got {threshold_kmh}"
                ));
            }
            WaveformMode::Hybrid { threshold_kmh }
        }
        other => {
            return config_err(format!(
                "[scenario] unknown waveform {other:?}; expected \"ofdm\", \"otfs\", or \"hybrid\""
            ))
        }
    };

    if raw.scenario.speeds_kmh.is_empty() {
        return config_err("[scenario] speeds_kmh must not be empty");
    }
    for &v in &raw.scenario.speeds_kmh {
        if !v.is_finite() || v < 0.0 {
            return config_err(format!("[scenario] speeds must be finite and >= 0, got {v}"));
        }
    }
    if !raw.scenario.noiseless {
        if raw.scenario.snr_db.is_empty() {
            return config_err("[scenario] snr_db must not be empty");
        }
        for &s in &raw.scenario.snr_db {
            if !s.is_finite() {
                return config_err(format!("[scenario] SNR points must be finite, got {s}"));
            }
        }
    }
    let snrs_db = if raw.scenario.noiseless { vec![f64::INFINITY] } else { raw.scenario.snr_db.clone() };

    let modulation = Modulation::try_from(raw.scenario.mod_order)
        .map_err(|e| Error::Config(format!("[scenario] {e}")))?;

    if raw.scenario.frames == 0 {
        return config_err("[scenario] frames must be at least 1");
    }
    if raw.scenario.min_bits < MIN_BITS_FLOOR {
        return config_err(format!(
            "[scenario] min_bits = {} is below the statistical floor of {MIN_BITS_FLOOR}",
            raw.scenario.min_bits
        ));
    }

    if raw.sensing.snr_db.is_nan() {
        return config_err("[sensing] snr_db must not be NaN");
    }
    if !raw.sensing.target_range_m.is_finite() || raw.sensing.target_range_m < 0.0 {
        return config_err(format!(
            "[sensing] target_range_m must be finite and >= 0, got {}",
            raw.sensing.target_range_m
        ));
    }
    let sensing = SensingSettings {
        snr_db: raw.sensing.snr_db,
        target_range_m: raw.sensing.target_range_m,
        tol_bins: raw.sensing.tol_bins,
        stop_ratio: raw.sensing.stop_ratio,
        max_targets: raw.sensing.max_targets,
    };
    sensing.options().validate().map_err(|e| Error::Config(format!("[sensing] {e}")))?;

    Ok(SimConfig {
        params,
        mode,
        speeds_kmh: raw.scenario.speeds_kmh,
        snrs_db,
        modulation,
        profile,
        frames: raw.scenario.frames,
        min_bits: raw.scenario.min_bits,
        seed: raw.scenario.seed,
        sensing,
    })
}

// ─────────────────────────────────────────────────────────────────────────
