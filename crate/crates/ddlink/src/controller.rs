//! Speed-adaptive waveform control: sense the mobile's speed from a
//! round-trip pilot echo, pick the waveform for the regime, then run the
//! data link.
//!
//! The policy is a threshold on estimated radial speed. At or below the
//! threshold the link uses plain multicarrier transmission with one-tap
//! equalization, which is cheap and adequate while the channel barely
//! moves within a frame. Above it the link switches to delay-Doppler
//! modulation with full LMMSE detection, which keeps working when
//! Doppler decorrelates the channel across the frame. A hysteresis band
//! is available for tracking controllers so estimate jitter near the
//! threshold cannot flap the waveform.
//!
//! The adaptive runner and the fixed-waveform runner share one data path
//! and split their randomness into separate derived streams (data vs
//! sensing), so for a given block seed the adaptive run is bit-identical
//! to the fixed run of whichever waveform it selected. That equivalence
//! is load-bearing: it is what makes adaptive sweep results directly
//! comparable to the fixed-waveform baselines.
//!
//! The one-tap receiver model here is deliberately pessimistic in time:
//! its channel estimate is the frame-initial snapshot
//! ([`channel::freq_response_frozen`]), the way a practical
//! preamble-estimated link behaves. At walking speeds the estimate stays
//! valid across the frame; at vehicular speeds it ages within the frame
//! and the residual mismatch, not receiver noise, dominates the error
//! rate. The delay-Doppler receiver instead inverts the full effective
//! channel and has no such staleness mechanism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

use crate::channel::{self, Profile};
use crate::error::{Error, Result};
use crate::grid::{DDGrid, TFGrid};
use crate::ofdm;
use crate::ops::{self, OpCount};
use crate::otfs;
use crate::params::LinkParams;
use crate::qam::{self, Modulation};
use crate::seed;
use crate::sensing::{self, EchoTarget};
use num_complex::Complex64;

/// Substream indices under a block seed: the data stream is consumed by
/// channel draws, payload bits, and data noise; the sensing stream only
/// by echo noise. Keeping them apart is what makes fixed and adaptive
/// runs comparable draw-for-draw.
const DATA_STREAM: u64 = 0;
const SENSING_STREAM: u64 = 1;

// ── Waveform selection ──────────────────────────────────────────────────

/// The two transmission modes the controller arbitrates between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveformChoice {
    Ofdm,
    Otfs,
}

impl fmt::Display for WaveformChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveformChoice::Ofdm => "ofdm",
            WaveformChoice::Otfs => "otfs",
        })
    }
}

/// Speed-threshold switching rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchPolicy {
    threshold_ms: f64,
    hysteresis_ms: f64,
}

impl SwitchPolicy {
    pub fn new(threshold_ms: f64, hysteresis_ms: f64) -> Result<Self> {
        if !threshold_ms.is_finite() || threshold_ms < 0.0 {
            return Err(Error::invalid(format!(
                "threshold must be finite and >= 0, got {threshold_ms}"
            )));
        }
        if !hysteresis_ms.is_finite() || hysteresis_ms < 0.0 {
            return Err(Error::invalid(format!(
                "hysteresis must be finite and >= 0, got {hysteresis_ms}"
            )));
        }
        Ok(SwitchPolicy { threshold_ms, hysteresis_ms })
    }

    pub fn threshold_ms(&self) -> f64 {
        self.threshold_ms
    }

    pub fn hysteresis_ms(&self) -> f64 {
        self.hysteresis_ms
    }
}

/// Stateless selection: at or below the threshold the cheap waveform
/// wins; strictly above it the Doppler-robust one does.
pub fn select_waveform(speed_ms: f64, policy: &SwitchPolicy) -> WaveformChoice {
    if speed_ms <= policy.threshold_ms {
        WaveformChoice::Ofdm
    } else {
        WaveformChoice::Otfs
    }
}

/// Stateful selection with hysteresis: leaving the current waveform
/// requires crossing the threshold by the full hysteresis margin, so an
/// estimate dithering inside the band never flaps.
pub fn select_waveform_with_state(
    speed_ms: f64,
    policy: &SwitchPolicy,
    current: WaveformChoice,
) -> WaveformChoice {
    match current {
        WaveformChoice::Ofdm if speed_ms > policy.threshold_ms + policy.hysteresis_ms => {
            WaveformChoice::Otfs
        }
        WaveformChoice::Otfs if speed_ms <= policy.threshold_ms - policy.hysteresis_ms => {
            WaveformChoice::Ofdm
        }
        _ => current,
    }
}

// ── Link scenario and report ────────────────────────────────────────────

/// One simulated operating point: a mobile at a fixed speed, a channel
/// family, and the signal constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    /// True mobile speed in m/s.
    pub speed_ms: f64,
    /// Data-link SNR in dB; `f64::INFINITY` disables noise.
    pub snr_db: f64,
    /// SNR of the sensing echo in dB.
    pub sensing_snr_db: f64,
    pub modulation: Modulation,
    pub profile: Profile,
    /// Data frames transmitted over one channel realization.
    pub frames: usize,
    /// Round-trip reflector range for the sensing phase, meters.
    pub target_range_m: f64,
    /// Doppler refinement tolerance in bin units.
    pub tol_bins: f64,
}

impl LinkScenario {
    fn validate(&self) -> Result<()> {
        if !self.speed_ms.is_finite() || self.speed_ms < 0.0 {
            return Err(Error::invalid(format!("speed must be finite and >= 0, got {}", self.speed_ms)));
        }
        if self.snr_db.is_nan() || self.sensing_snr_db.is_nan() {
            return Err(Error::invalid("SNR must not be NaN".to_string()));
        }
        if self.frames == 0 {
            return Err(Error::invalid("frames must be at least 1".to_string()));
        }
        if !self.target_range_m.is_finite() || self.target_range_m < 0.0 {
            return Err(Error::invalid(format!(
                "target range must be finite and >= 0, got {}",
                self.target_range_m
            )));
        }
        if !self.tol_bins.is_finite() || self.tol_bins <= 0.0 {
            return Err(Error::invalid(format!("tol_bins must be finite and > 0, got {}", self.tol_bins)));
        }
        Ok(())
    }
}

/// Outcome of one block (one channel realization, `frames` data frames).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkReport {
    pub waveform: WaveformChoice,
    /// Sensed radial speed magnitude, absent for fixed-waveform runs.
    pub speed_estimate_ms: Option<f64>,
    pub true_speed_ms: f64,
    pub bits: u64,
    pub bit_errors: u64,
    /// Transform work of the sensing phase (zero for fixed runs).
    pub sensing_ops: OpCount,
    /// Transform work of the data phase, equalizer setup included.
    pub data_ops: OpCount,
    /// True when refinement failed to converge and the controller fell
    /// back to the low-speed waveform.
    pub fell_back: bool,
}

impl LinkReport {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }
}

// ── Runners ─────────────────────────────────────────────────────────────

fn draw_bits(count: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..count).map(|_| rng.gen::<bool>() as u8).collect()
}

fn count_errors(sent: &[u8], received: &[u8]) -> u64 {
    sent.iter().zip(received).filter(|(a, b)| a != b).count() as u64
}

/// One block of the data link: draw a channel realization, then push
/// `frames` independently drawn payloads through it. Consumes only the
/// data RNG stream, in a fixed order (channel, then per frame: bits,
/// noise), so the result depends on the stream alone, not on who invoked
/// it.
fn run_data_path(
    waveform: WaveformChoice,
    sc: &LinkScenario,
    p: &LinkParams,
    rng: &mut ChaCha8Rng,
) -> Result<(u64, u64)> {
    let ch = sc.profile.draw(sc.speed_ms, p, rng)?;
    let bits_per_frame = p.m() * p.n() * sc.modulation.bits_per_symbol();
    let mut total_bits = 0u64;
    let mut total_errors = 0u64;
    match waveform {
        WaveformChoice::Ofdm => {
            let h = channel::freq_response_frozen(&ch, p);
            for _ in 0..sc.frames {
                let bits = draw_bits(bits_per_frame, rng);
                let symbols = qam::modulate(&bits, sc.modulation)?;
                let x = TFGrid::from_col_major_vec(p.m(), p.n(), &symbols)?;
                let tx = ofdm::modulate(&x, p)?;
                let rx = channel::add_awgn(&channel::apply(&tx, &ch, p)?, sc.snr_db, rng);
                let y = ofdm::demodulate(&rx, p)?;
                let (equalized, _) = ofdm::equalize_zf(&y, &h)?;
                let hard = qam::demodulate_hard(&equalized.to_col_major_vec(), sc.modulation)?;
                total_bits += bits.len() as u64;
                total_errors += count_errors(&bits, &hard);
            }
        }
        WaveformChoice::Otfs => {
            let h_eff = otfs::effective_channel(&ch, p)?;
            for _ in 0..sc.frames {
                let bits = draw_bits(bits_per_frame, rng);
                let symbols = qam::modulate(&bits, sc.modulation)?;
                let x = DDGrid::from_col_major_vec(p.m(), p.n(), &symbols)?;
                let tx = otfs::modulate(&x, p)?;
                let faded = channel::apply(&tx, &ch, p)?;
                let noise_var = channel::noise_variance(&faded, sc.snr_db);
                let rx = channel::add_awgn(&faded, sc.snr_db, rng);
                let y = otfs::demodulate(&rx, p)?;
                let equalized = otfs::equalize_lmmse(&y, &h_eff, noise_var)?;
                let hard = qam::demodulate_hard(&equalized.to_col_major_vec(), sc.modulation)?;
                total_bits += bits.len() as u64;
                total_errors += count_errors(&bits, &hard);
            }
        }
    }
    Ok((total_bits, total_errors))
}

/// Runs one block at a caller-chosen waveform. The data RNG stream is
/// derived from `block_seed` exactly as in [`run_adaptive_link`].
pub fn run_fixed_link(
    waveform: WaveformChoice,
    sc: &LinkScenario,
    p: &LinkParams,
    block_seed: u64,
) -> Result<LinkReport> {
    sc.validate()?;
    let mut rng_data = ChaCha8Rng::seed_from_u64(seed::derive(block_seed, DATA_STREAM));
    let before = ops::snapshot();
    let (bits, bit_errors) = run_data_path(waveform, sc, p, &mut rng_data)?;
    let data_ops = ops::snapshot().since(before);
    Ok(LinkReport {
        waveform,
        speed_estimate_ms: None,
        true_speed_ms: sc.speed_ms,
        bits,
        bit_errors,
        sensing_ops: OpCount::default(),
        data_ops,
        fell_back: false,
    })
}

/// Senses speed from a round-trip pilot echo, selects the waveform, then
/// runs the same data path as [`run_fixed_link`] on the data stream.
///
/// If refinement does not converge the controller falls back to the
/// low-speed waveform and flags the block. The speed fed to the policy is
/// the estimate's magnitude; the echo geometry gives signed radial speed
/// and waveform stress depends only on how fast the channel moves.
pub fn run_adaptive_link(
    sc: &LinkScenario,
    p: &LinkParams,
    policy: &SwitchPolicy,
    block_seed: u64,
) -> Result<LinkReport> {
    sc.validate()?;
    let mut rng_sense = ChaCha8Rng::seed_from_u64(seed::derive(block_seed, SENSING_STREAM));
    let before_sense = ops::snapshot();
    let echo = sensing::echo_channel(
        &[EchoTarget {
            range_m: sc.target_range_m,
            speed_ms: sc.speed_ms,
            gain: Complex64::new(1.0, 0.0),
        }],
        p,
    )?;
    let pilot_rx = channel::add_awgn(
        &channel::apply(&sensing::pilot_signal(p)?, &echo, p)?,
        sc.sensing_snr_db,
        &mut rng_sense,
    );
    let sensed = sensing::sense_speed(&otfs::demodulate(&pilot_rx, p)?, p, sc.tol_bins)?;
    let sensing_ops = ops::snapshot().since(before_sense);

    let v_hat = sensed.radial_speed_ms.abs();
    let (waveform, fell_back) = if sensed.converged {
        (select_waveform(v_hat, policy), false)
    } else {
        (WaveformChoice::Ofdm, true)
    };

    let mut rng_data = ChaCha8Rng::seed_from_u64(seed::derive(block_seed, DATA_STREAM));
    let before_data = ops::snapshot();
    let (bits, bit_errors) = run_data_path(waveform, sc, p, &mut rng_data)?;
    let data_ops = ops::snapshot().since(before_data);
    Ok(LinkReport {
        waveform,
        speed_estimate_ms: Some(v_hat),
        true_speed_ms: sc.speed_ms,
        bits,
        bit_errors,
        sensing_ops,
        data_ops,
        fell_back,
    })
}

// ─────────────────────────────────────────────────────────────────────────
