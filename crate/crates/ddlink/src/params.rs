//! Link parameterization shared by every module in the crate.
//!
//! A [`LinkParams`] fixes the delay-Doppler / time-frequency geometry:
//!
//! * `m` subcarriers spaced `delta_f` Hz apart (the delay axis has `m` bins),
//! * `n` multicarrier symbols per frame (the Doppler axis has `n` bins),
//! * a cyclic prefix of `cp_len` samples on every symbol,
//! * a carrier frequency `f_c` used only for speed/Doppler conversions.
//!
//! Derived geometry:
//!
//! * symbol duration `T = 1/delta_f`, sample period `T_s = T/m`,
//! * occupied bandwidth `B = m * delta_f`,
//! * frame duration `N*T` (excluding prefixes),
//! * delay resolution `1/(m*delta_f)` (one sample),
//! * nominal Doppler resolution `1/(n*T)`.
//!
//! One subtlety deserves emphasis because several modules depend on it. With
//! a cyclic prefix on every symbol, consecutive symbols are spaced
//! `(m + cp_len) * T_s` apart rather than `T`. The demodulated delay-Doppler
//! grid therefore quantizes Doppler in steps of
//!
//! ```text
//! doppler_bin_hz = 1 / (n * (m + cp_len) * T_s)
//! ```
//!
//! and a single path whose Doppler is an integer multiple of that step shifts
//! a delay-Doppler impulse cyclically with no leakage. The nominal resolution
//! `1/(n*T)` (which ignores the prefix overhead) is still exposed because it
//! describes the physical frame, but anything that reasons about integer
//! Doppler bins of the discrete chain must use [`LinkParams::doppler_bin_hz`].
//! The two coincide when `cp_len == 0`.

use crate::error::{Error, Result};

/// Speed of light in m/s, used by every speed/Doppler conversion.
pub const C0: f64 = 2.997_924_58e8;

/// Converts km/h to m/s.
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Converts m/s to km/h.
pub fn ms_to_kmh(ms: f64) -> f64 {
    ms * 3.6
}

/// Transmit/receive pulse family. Only rectangular pulses are implemented;
/// the enum exists so the assumption is visible at call sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pulse {
    #[default]
    Rectangular,
}

/// Immutable description of one link configuration.
///
/// Invariants (enforced by [`LinkParams::new`]):
/// * `m >= 2`, `n >= 2`
/// * `delta_f > 0`, `f_c > 0`
/// * `0 <= cp_len < m`
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    m: usize,
    n: usize,
    delta_f: f64,
    f_c: f64,
    cp_len: usize,
    pulse: Pulse,
}

impl LinkParams {
    /// Speed of light in m/s, alias of the module-level [`C0`].
    pub const C0: f64 = C0;

    /// Validates and constructs a parameter set.
    pub fn new(m: usize, n: usize, delta_f: f64, f_c: f64, cp_len: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("m must be >= 2, got {m}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("n must be >= 2, got {n}")));
        }
        if !(delta_f > 0.0) || !delta_f.is_finite() {
            return Err(Error::invalid(format!(
                "subcarrier spacing must be positive and finite, got {delta_f}"
            )));
        }
        if !(f_c > 0.0) || !f_c.is_finite() {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive and finite, got {f_c}"
            )));
        }
        if cp_len >= m {
            return Err(Error::invalid(format!(
                "cp_len must be < m ({m}), got {cp_len}"
            )));
        }
        Ok(LinkParams { m, n, delta_f, f_c, cp_len, pulse: Pulse::Rectangular })
    }

    // ── Raw fields ──────────────────────────────────────────────────────

    /// Number of subcarriers (delay bins).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of multicarrier symbols per frame (Doppler bins).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Subcarrier spacing in Hz.
    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    /// Carrier frequency in Hz.
    pub fn f_c(&self) -> f64 {
        self.f_c
    }

    /// Cyclic-prefix length in samples.
    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    /// Pulse shape (always rectangular in this version).
    pub fn pulse(&self) -> Pulse {
        self.pulse
    }

    // ── Derived geometry ────────────────────────────────────────────────

    /// Symbol duration `T = 1/delta_f` in seconds, prefix excluded.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// Sample period `T_s = T/m` in seconds.
    pub fn sample_period(&self) -> f64 {
        self.symbol_duration() / self.m as f64
    }

    /// Occupied bandwidth `B = m * delta_f` in Hz.
    pub fn bandwidth(&self) -> f64 {
        self.m as f64 * self.delta_f
    }

    /// Frame duration `n * T` in seconds, prefixes excluded.
    pub fn frame_duration(&self) -> f64 {
        self.n as f64 * self.symbol_duration()
    }

    /// Samples per transmitted symbol including its prefix: `m + cp_len`.
    pub fn slot_len(&self) -> usize {
        self.m + self.cp_len
    }

    /// Samples per transmitted frame: `n * (m + cp_len)`.
    pub fn frame_len(&self) -> usize {
        self.n * self.slot_len()
    }

    /// Delay resolution `1/(m*delta_f)` in seconds (one sample period).
    pub fn delay_resolution(&self) -> f64 {
        1.0 / self.bandwidth()
    }

    /// Nominal Doppler resolution `1/(n*T)` in Hz. Ignores prefix overhead;
    /// see the module docs and [`LinkParams::doppler_bin_hz`].
    pub fn doppler_resolution(&self) -> f64 {
        1.0 / self.frame_duration()
    }

    /// Doppler quantization step of the demodulated delay-Doppler grid,
    /// `1/(n * (m + cp_len) * T_s)`. A path at an integer multiple of this
    /// step produces an exact cyclic shift along the Doppler axis; the
    /// sensing grid is laid out in these steps. Equals
    /// [`LinkParams::doppler_resolution`] when `cp_len == 0`.
    pub fn doppler_bin_hz(&self) -> f64 {
        1.0 / (self.n as f64 * self.slot_len() as f64 * self.sample_period())
    }

    /// One-way Doppler shift in Hz for a radial speed in m/s:
    /// `f_c * v / c0`.
    pub fn doppler_for_speed(&self, speed_ms: f64) -> f64 {
        self.f_c * speed_ms / Self::C0
    }
}

// ─────────────────────────────────────────────────────────────────────────
