//! Linear time-varying multipath propagation, tap profiles, and receiver
//! noise.
//!
//! A channel is a list of discrete paths, each with a complex gain, a
//! delay, and a Doppler shift. Applying it to a sampled signal follows the
//! tapped-delay-line model
//!
//! ```text
//! r[q] = sum_i  alpha_i * exp(j 2 pi nu_i (q - l_i) T_s) * s[q - l_i]
//! ```
//!
//! with `s[q] = 0` for `q < 0` and delays quantized to whole samples
//! (`l_i = round(tau_i / T_s)`); Doppler stays continuous because
//! fractional Doppler is exactly the regime the rest of the crate cares
//! about. Output length equals input length.
//!
//! [`Profile`] turns a named power-delay profile into random realizations:
//! tap gains are independent complex Gaussians with the profile's powers
//! (normalized to unit total), and each tap gets an independent arrival
//! angle `theta ~ U[0, 2 pi)` so its Doppler is `f_c v / c0 * cos(theta)`.
//! The built-in `Eva` profile is the common 9-tap extended vehicular
//! profile (delays up to 2.51 us); `SinglePath` is the deterministic
//! unit-gain sanity channel used for AWGN calibration.
//!
//! [`freq_response`] exposes the genie channel knowledge the OFDM
//! equalizer consumes: per subcarrier and symbol, the DFT of the impulse
//! response frozen at the midpoint sample of that symbol's body. Under
//! time variation the within-symbol deviation from that frozen snapshot is
//! precisely the inter-carrier interference no one-tap equalizer can
//! remove. [`freq_response_frozen`] additionally holds the first symbol's
//! snapshot for the whole frame, modeling a receiver whose (otherwise
//! perfect) channel estimate ages over the frame; that staleness, not
//! noise, is what makes one-tap OFDM collapse at vehicular speeds.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::{TFGrid, TimeSignal};
use crate::params::LinkParams;

// ── Paths and realizations ──────────────────────────────────────────────

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    /// Complex path gain.
    pub gain: Complex64,
    /// Path delay in seconds, `>= 0`.
    pub delay_s: f64,
    /// Doppler shift in Hz; magnitude must stay below half the subcarrier
    /// spacing of the link the path is used with.
    pub doppler_hz: f64,
}

/// A validated path set bound to one link geometry, with delays quantized
/// to whole samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    paths: Vec<PathSpec>,
    discrete_delays: Vec<usize>,
}

impl ChannelRealization {
    /// Validates paths against the link and quantizes their delays.
    ///
    /// Rejects negative or non-finite delays and any Doppler with
    /// `|nu| >= delta_f / 2`.
    pub fn new(paths: Vec<PathSpec>, p: &LinkParams) -> Result<Self> {
        let ts = p.sample_period();
        let mut discrete = Vec::with_capacity(paths.len());
        for (i, path) in paths.iter().enumerate() {
            if !path.delay_s.is_finite() || path.delay_s < 0.0 {
                return Err(Error::invalid(format!(
                    "path {i}: delay must be finite and >= 0, got {}",
                    path.delay_s
                )));
            }
            if !path.doppler_hz.is_finite() || path.doppler_hz.abs() >= p.delta_f() / 2.0 {
                return Err(Error::invalid(format!(
                    "path {i}: |doppler| must be < delta_f/2 = {}, got {}",
                    p.delta_f() / 2.0,
                    path.doppler_hz
                )));
            }
            discrete.push((path.delay_s / ts).round() as usize);
        }
        Ok(ChannelRealization { paths, discrete_delays: discrete })
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    /// Per-path delays in samples, aligned with [`Self::paths`].
    pub fn discrete_delays(&self) -> &[usize] {
        &self.discrete_delays
    }

    /// Largest quantized delay, 0 for an empty path set.
    pub fn max_discrete_delay(&self) -> usize {
        self.discrete_delays.iter().copied().max().unwrap_or(0)
    }

    fn check_cp_budget(&self, p: &LinkParams) -> Result<()> {
        let lmax = self.max_discrete_delay();
        if lmax > p.cp_len() {
            return Err(Error::precondition(format!(
                "max discrete delay {lmax} samples exceeds cp_len {}",
                p.cp_len()
            )));
        }
        Ok(())
    }
}

// ── Propagation and noise ───────────────────────────────────────────────

/// Runs a signal through a channel realization.
///
/// Precondition: every quantized delay fits inside the link's cyclic
/// prefix, so each received symbol body only mixes with its own prefix.
pub fn apply(s: &TimeSignal, ch: &ChannelRealization, p: &LinkParams) -> Result<TimeSignal> {
    ch.check_cp_budget(p)?;
    let ts = p.sample_period();
    let input = s.samples();
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for (path, &l) in ch.paths().iter().zip(ch.discrete_delays()) {
        for q in l..input.len() {
            let phase = TAU * path.doppler_hz * (q - l) as f64 * ts;
            out[q] += path.gain * Complex64::from_polar(1.0, phase) * input[q - l];
        }
    }
    Ok(TimeSignal::new(out, s.sample_period()))
}

/// Draws one zero-mean complex Gaussian with total variance `var`
/// (`var/2` per real component), via the polar Box-Muller transform. One
/// call consumes exactly two uniforms, which keeps RNG streams easy to
/// reason about.
pub(crate) fn complex_gaussian(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    // 1 - U in (0, 1] avoids ln(0).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    Complex64::from_polar((-u1.ln() * var).sqrt(), TAU * u2)
}

/// Adds white complex Gaussian noise at a per-sample SNR in dB.
///
/// The noise variance is `P_sig / 10^(snr_db/10)` with `P_sig` the
/// measured mean power of `s` itself, so with unit-energy symbols and the
/// crate's unitary transforms `snr_db` equals symbol `Es/N0`. An SNR of
/// `f64::INFINITY` is the noiseless mode: the signal is returned unchanged
/// and the RNG is not consumed.
pub fn add_awgn(s: &TimeSignal, snr_db: f64, rng: &mut ChaCha8Rng) -> TimeSignal {
    if snr_db == f64::INFINITY {
        return s.clone();
    }
    let var = s.mean_power() / 10f64.powf(snr_db / 10.0);
    let mut out = s.clone();
    for z in out.samples_mut() {
        *z += complex_gaussian(rng, var);
    }
    out
}

/// Noise variance `add_awgn` would use for this signal and SNR: the
/// genie value handed to the LMMSE detector. Zero in noiseless mode.
pub fn noise_variance(s: &TimeSignal, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        s.mean_power() / 10f64.powf(snr_db / 10.0)
    }
}

// ── Perfect channel knowledge for the OFDM receiver ─────────────────────

/// Midpoint sample index of symbol `n`'s body.
fn midpoint_sample(p: &LinkParams, n: usize) -> usize {
    n * p.slot_len() + p.cp_len() + p.m() / 2
}

/// Per-subcarrier, per-symbol channel response under the frozen-snapshot
/// convention:
///
/// ```text
/// h[m, n] = sum_i alpha_i
///           * exp(j 2 pi nu_i (q_mid(n) - l_i) T_s)
///           * exp(-j 2 pi m l_i / M)
/// ```
///
/// where `q_mid(n)` is the midpoint sample of symbol `n`'s body and `l_i`
/// the quantized delays. For a static channel within the CP budget this is
/// exactly the per-subcarrier gain the demodulated frame sees.
pub fn freq_response(ch: &ChannelRealization, p: &LinkParams) -> TFGrid {
    let ts = p.sample_period();
    TFGrid::from_fn(p.m(), p.n(), |mm, nn| {
        let q_mid = midpoint_sample(p, nn);
        let mut acc = Complex64::new(0.0, 0.0);
        for (path, &l) in ch.paths().iter().zip(ch.discrete_delays()) {
            let doppler_phase = TAU * path.doppler_hz * (q_mid as f64 - l as f64) * ts;
            let delay_phase = -TAU * (mm * l) as f64 / p.m() as f64;
            acc += path.gain * Complex64::from_polar(1.0, doppler_phase + delay_phase);
        }
        acc
    })
}

/// [`freq_response`] with the first symbol's snapshot held for the whole
/// frame: the stale-estimate receiver model. Identical to
/// [`freq_response`] for static channels.
pub fn freq_response_frozen(ch: &ChannelRealization, p: &LinkParams) -> TFGrid {
    let full = freq_response(ch, p);
    TFGrid::from_fn(p.m(), p.n(), |mm, _| full.get(mm, 0))
}

// ── Named profiles ──────────────────────────────────────────────────────

/// One tap of a power-delay profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_ns: f64,
    pub power_db: f64,
}

/// The 9-tap extended vehicular power-delay profile.
pub fn eva_taps() -> Vec<Tap> {
    const DELAYS_NS: [f64; 9] = [0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0];
    const POWERS_DB: [f64; 9] = [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9];
    DELAYS_NS
        .iter()
        .zip(&POWERS_DB)
        .map(|(&delay_ns, &power_db)| Tap { delay_ns, power_db })
        .collect()
}

/// A named channel family that can be drawn into realizations.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Rayleigh-faded extended vehicular profile ([`eva_taps`]).
    Eva,
    /// Deterministic single path: gain 1, delay 0, Doppler `f_c v / c0`.
    /// With `v = 0` this is the pure-AWGN calibration channel.
    SinglePath,
    /// User-supplied taps, drawn like `Eva` (unit-normalized Rayleigh
    /// gains, independent arrival angles).
    Custom(Vec<Tap>),
}

impl Profile {
    fn taps(&self) -> Option<Vec<Tap>> {
        match self {
            Profile::Eva => Some(eva_taps()),
            Profile::Custom(taps) => Some(taps.clone()),
            Profile::SinglePath => None,
        }
    }

    /// Largest tap delay in samples, rounded up: the smallest cyclic
    /// prefix that accommodates every realization of this profile.
    pub fn min_cp_len(&self, p: &LinkParams) -> usize {
        match self.taps() {
            None => 0,
            Some(taps) => taps
                .iter()
                .map(|t| (t.delay_ns * 1e-9 / p.sample_period()).ceil() as usize)
                .max()
                .unwrap_or(0),
        }
    }

    /// Draws one realization at radial speed `speed_ms` (m/s).
    ///
    /// Faded profiles consume, per tap in order: two uniforms for the
    /// complex Gaussian gain, then one uniform for the arrival angle.
    /// `SinglePath` consumes no randomness.
    pub fn draw(&self, speed_ms: f64, p: &LinkParams, rng: &mut ChaCha8Rng) -> Result<ChannelRealization> {
        if !speed_ms.is_finite() || speed_ms < 0.0 {
            return Err(Error::invalid(format!("speed must be finite and >= 0, got {speed_ms}")));
        }
        let nu_max = p.doppler_for_speed(speed_ms);
        let paths = match self.taps() {
            None => vec![PathSpec { gain: Complex64::new(1.0, 0.0), delay_s: 0.0, doppler_hz: nu_max }],
            Some(taps) => {
                if taps.is_empty() {
                    return Err(Error::invalid("custom profile must have at least one tap".to_string()));
                }
                let total: f64 = taps.iter().map(|t| 10f64.powf(t.power_db / 10.0)).sum();
                taps.iter()
                    .map(|t| {
                        let power = 10f64.powf(t.power_db / 10.0) / total;
                        let gain = complex_gaussian(rng, power);
                        let theta = TAU * rng.gen::<f64>();
                        PathSpec {
                            gain,
                            delay_s: t.delay_ns * 1e-9,
                            doppler_hz: nu_max * theta.cos(),
                        }
                    })
                    .collect()
            }
        };
        ChannelRealization::new(paths, p)
    }
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm;
    use crate::testutil::{random_tf_grid, reference_params, rng};

    fn single_path(gain: Complex64, delay_s: f64, doppler_hz: f64, p: &LinkParams) -> ChannelRealization {
        ChannelRealization::new(vec![PathSpec { gain, delay_s, doppler_hz }], p).unwrap()
    }

    fn ramp_signal(len: usize, ts: f64) -> TimeSignal {
        TimeSignal::new(
            (0..len).map(|q| Complex64::new(q as f64 + 1.0, -(q as f64) * 0.5)).collect(),
            ts,
        )
    }

    #[test]
    fn identity_path_is_transparent() {
        let p = reference_params();
        let s = ramp_signal(p.frame_len(), p.sample_period());
        let ch = single_path(Complex64::new(1.0, 0.0), 0.0, 0.0, &p);
        let r = apply(&s, &ch, &p).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn pure_delay_shifts_with_zero_head() {
        let p = reference_params();
        let s = ramp_signal(p.frame_len(), p.sample_period());
        let ch = single_path(Complex64::new(1.0, 0.0), p.sample_period(), 0.0, &p);
        let r = apply(&s, &ch, &p).unwrap();
        assert_eq!(r.samples()[0], Complex64::new(0.0, 0.0));
        for q in 1..s.len() {
            assert_eq!(r.samples()[q], s.samples()[q - 1]);
        }
    }

    #[test]
    fn pure_doppler_applies_progressive_phase_ramp() {
        let p = reference_params();
        let s = ramp_signal(p.frame_len(), p.sample_period());
        let nu = 440.0;
        let ch = single_path(Complex64::new(1.0, 0.0), 0.0, nu, &p);
        let r = apply(&s, &ch, &p).unwrap();
        for q in 0..s.len() {
            let want = s.samples()[q]
                * Complex64::from_polar(1.0, TAU * nu * q as f64 * p.sample_period());
            assert!((r.samples()[q] - want).norm() < 1e-12, "sample {q}");
        }
    }

    #[test]
    fn channel_application_is_linear_in_the_signal() {
        let p = reference_params();
        let mut r = rng(0xC4A1);
        let ch = Profile::Eva.draw(30.0, &p, &mut r).unwrap();
        let a = ramp_signal(p.frame_len(), p.sample_period());
        let b = TimeSignal::new(
            (0..p.frame_len()).map(|q| Complex64::from_polar(1.0, 0.1 * q as f64)).collect(),
            p.sample_period(),
        );
        let alpha = Complex64::new(-0.3, 0.8);
        let combo = TimeSignal::new(
            a.samples().iter().zip(b.samples()).map(|(&x, &y)| alpha * x + y).collect(),
            p.sample_period(),
        );
        let lhs = apply(&combo, &ch, &p).unwrap();
        let ra = apply(&a, &ch, &p).unwrap();
        let rb = apply(&b, &ch, &p).unwrap();
        for q in 0..p.frame_len() {
            let rhs = alpha * ra.samples()[q] + rb.samples()[q];
            assert!((lhs.samples()[q] - rhs).norm() < 1e-10, "sample {q}");
        }
    }

    #[test]
    fn delay_beyond_prefix_budget_is_rejected() {
        let p = reference_params(); // cp_len = 1
        let s = ramp_signal(p.frame_len(), p.sample_period());
        let ch = single_path(Complex64::new(1.0, 0.0), 2.5 * p.sample_period(), 0.0, &p);
        assert!(matches!(apply(&s, &ch, &p), Err(Error::Precondition(_))));
    }

    #[test]
    fn realization_rejects_bad_paths() {
        let p = reference_params();
        let bad_delay = vec![PathSpec { gain: Complex64::new(1.0, 0.0), delay_s: -1e-9, doppler_hz: 0.0 }];
        assert!(ChannelRealization::new(bad_delay, &p).is_err());
        let bad_doppler =
            vec![PathSpec { gain: Complex64::new(1.0, 0.0), delay_s: 0.0, doppler_hz: 7500.0 }];
        assert!(ChannelRealization::new(bad_doppler, &p).is_err());
    }

    #[test]
    fn eva_quantizes_to_two_sample_span_at_reference_bandwidth() {
        // At 240 kHz sampling (T_s = 4.167 us) the 2.51 us profile rounds
        // onto samples {0, 1}: only the last tap reaches the second bin.
        let p = reference_params();
        let ch = Profile::Eva.draw(0.0, &p, &mut rng(1)).unwrap();
        assert_eq!(ch.discrete_delays(), &[0, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(ch.max_discrete_delay(), 1);
        assert_eq!(Profile::Eva.min_cp_len(&p), 1);
    }

    #[test]
    fn eva_mean_power_is_unit_normalized() {
        let p = reference_params();
        let mut r = rng(0xE7A0);
        let draws = 2000;
        let mut total = 0.0;
        for _ in 0..draws {
            let ch = Profile::Eva.draw(120.0 / 3.6, &p, &mut r).unwrap();
            total += ch.paths().iter().map(|path| path.gain.norm_sqr()).sum::<f64>();
        }
        let mean = total / draws as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean total path power {mean}");
    }

    #[test]
    fn drawn_dopplers_stay_within_the_speed_cone() {
        let p = reference_params();
        let v = 500.0 / 3.6;
        let nu_max = p.doppler_for_speed(v);
        let mut r = rng(0xD0);
        for _ in 0..200 {
            let ch = Profile::Eva.draw(v, &p, &mut r).unwrap();
            for path in ch.paths() {
                assert!(path.doppler_hz.abs() <= nu_max + 1e-9);
            }
        }
    }

    #[test]
    fn single_path_profile_is_deterministic_unit_gain() {
        let p = reference_params();
        let ch = Profile::SinglePath.draw(0.0, &p, &mut rng(7)).unwrap();
        assert_eq!(ch.paths().len(), 1);
        assert_eq!(ch.paths()[0].gain, Complex64::new(1.0, 0.0));
        assert_eq!(ch.paths()[0].doppler_hz, 0.0);
    }

    #[test]
    fn awgn_matches_requested_noise_power() {
        let p = reference_params();
        let len = 1_000_000;
        let s = TimeSignal::new(vec![Complex64::new(1.0, 0.0); len], p.sample_period());
        let snr_db = 10.0;
        let r = add_awgn(&s, snr_db, &mut rng(0xA06));
        let noise_power: f64 =
            r.samples().iter().zip(s.samples()).map(|(&y, &x)| (y - x).norm_sqr()).sum::<f64>()
                / len as f64;
        let want = 0.1;
        assert!((noise_power - want).abs() < 0.05 * want, "noise power {noise_power}");
        assert!((noise_variance(&s, snr_db) - want).abs() < 1e-15);
    }

    #[test]
    fn awgn_is_seed_deterministic_and_noiseless_mode_is_exact() {
        let p = reference_params();
        let s = ramp_signal(p.frame_len(), p.sample_period());
        let a = add_awgn(&s, 5.0, &mut rng(0x5EED));
        let b = add_awgn(&s, 5.0, &mut rng(0x5EED));
        assert_eq!(a, b);
        let clean = add_awgn(&s, f64::INFINITY, &mut rng(0x5EED));
        assert_eq!(clean, s);
        assert_eq!(noise_variance(&s, f64::INFINITY), 0.0);
    }

    #[test]
    fn static_multipath_diagonalizes_on_the_demodulated_grid() {
        // Two static taps inside the CP budget: the demodulated frame must
        // equal the transmitted grid scaled per-subcarrier by the DFT of
        // the tap vector, exactly the ISI-immunity property the prefix
        // exists to provide. freq_response must agree with that gain.
        let p = LinkParams::new(16, 8, 15e3, 0.95e9, 3).unwrap();
        let ts = p.sample_period();
        let taps = vec![
            PathSpec { gain: Complex64::new(0.8, -0.2), delay_s: 0.0, doppler_hz: 0.0 },
            PathSpec { gain: Complex64::new(-0.3, 0.45), delay_s: 2.0 * ts, doppler_hz: 0.0 },
        ];
        let ch = ChannelRealization::new(taps.clone(), &p).unwrap();
        let x = random_tf_grid(&p, &mut rng(0x51A7));
        let y = ofdm::demodulate(&apply(&ofdm::modulate(&x, &p).unwrap(), &ch, &p).unwrap(), &p).unwrap();
        let h = freq_response(&ch, &p);
        for mm in 0..p.m() {
            let want_h = taps[0].gain
                + taps[1].gain * Complex64::from_polar(1.0, -TAU * (2 * mm) as f64 / p.m() as f64);
            for nn in 0..p.n() {
                assert!((h.get(mm, nn) - want_h).norm() < 1e-12, "freq_response ({mm},{nn})");
                let want = x.get(mm, nn) * want_h;
                assert!((y.get(mm, nn) - want).norm() < 1e-9, "demodulated ({mm},{nn})");
            }
        }
        // Static channel: the frozen variant must be identical.
        assert_eq!(freq_response_frozen(&ch, &p), h);
    }

    #[test]
    fn cyclic_delay_inside_prefix_is_a_pure_phase_slope() {
        // DFT shift theorem oracle: a single path at d samples multiplies
        // subcarrier m by exp(-j 2 pi m d / M) once the prefix absorbs it.
        let p = LinkParams::new(16, 8, 15e3, 0.95e9, 4).unwrap();
        let d = 3usize;
        let ch = single_path(Complex64::new(1.0, 0.0), d as f64 * p.sample_period(), 0.0, &p);
        let x = random_tf_grid(&p, &mut rng(0xC1C));
        let y = ofdm::demodulate(&apply(&ofdm::modulate(&x, &p).unwrap(), &ch, &p).unwrap(), &p).unwrap();
        for mm in 0..p.m() {
            let slope = Complex64::from_polar(1.0, -TAU * (mm * d) as f64 / p.m() as f64);
            for nn in 0..p.n() {
                assert!((y.get(mm, nn) - x.get(mm, nn) * slope).norm() < 1e-9, "({mm},{nn})");
            }
        }
    }
}
