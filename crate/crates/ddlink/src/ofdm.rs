//! Cyclic-prefix OFDM: per-symbol IDFT/DFT between the time-frequency grid
//! and the sampled waveform, plus one-tap zero-forcing equalization.
//!
//! [`modulate`] turns column `n` of a [`TFGrid`] into `m` time samples via
//! a unitary inverse DFT,
//!
//! ```text
//! s_n[q] = 1/sqrt(M) * sum_m X[m, n] exp(+j 2 pi m q / M),
//! ```
//!
//! prepends the last `cp_len` samples of the symbol as its cyclic prefix,
//! and concatenates the `n` slots into one frame of
//! `n * (m + cp_len)` samples. [`demodulate`] discards each prefix and
//! applies the matching forward DFT with the same `1/sqrt(M)` scale, so
//! the pair is lossless and unitary on the retained samples.
//!
//! The prefix is what buys multipath immunity: any static channel whose
//! discrete delays fit inside `cp_len` acts circularly on each symbol body
//! and therefore diagonalizes to one complex gain per subcarrier. That
//! gain is what [`equalize_zf`] divides out.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{TFGrid, TimeSignal};
use crate::params::LinkParams;

/// Subcarrier gains with squared magnitude at or below this threshold are
/// not inverted by [`equalize_zf`]; the entry passes through and the event
/// is counted instead of flooding the frame with amplified garbage.
pub const ZF_EPSILON: f64 = 1e-12;

/// OFDM-modulates a time-frequency frame into `n * (m + cp_len)` samples.
pub fn modulate(x: &TFGrid, p: &LinkParams) -> Result<TimeSignal> {
    if x.rows() != p.m() || x.cols() != p.n() {
        return Err(Error::invalid(format!(
            "time-frequency grid must be {}x{}, got {}x{}",
            p.m(),
            p.n(),
            x.rows(),
            x.cols()
        )));
    }
    let (m, cp) = (p.m(), p.cp_len());
    let scale = 1.0 / (m as f64).sqrt();
    let mut out = Vec::with_capacity(p.frame_len());
    let mut body = vec![Complex64::default(); m];
    for nn in 0..p.n() {
        for mm in 0..m {
            body[mm] = x.get(mm, nn);
        }
        fft::inverse(&mut body);
        for s in &mut body {
            *s *= scale;
        }
        out.extend_from_slice(&body[m - cp..]);
        out.extend_from_slice(&body);
    }
    Ok(TimeSignal::new(out, p.sample_period()))
}

/// Recovers the time-frequency grid from a received frame.
///
/// The signal length must be exactly `n * (m + cp_len)`; each slot's
/// prefix is discarded before the forward DFT.
pub fn demodulate(r: &TimeSignal, p: &LinkParams) -> Result<TFGrid> {
    if r.len() != p.frame_len() {
        return Err(Error::invalid(format!(
            "frame must hold {} samples, got {}",
            p.frame_len(),
            r.len()
        )));
    }
    let (m, cp, slot) = (p.m(), p.cp_len(), p.slot_len());
    let scale = 1.0 / (m as f64).sqrt();
    let mut out = TFGrid::zero(m, p.n());
    let mut body = vec![Complex64::default(); m];
    for nn in 0..p.n() {
        let start = nn * slot + cp;
        body.copy_from_slice(&r.samples()[start..start + m]);
        fft::forward(&mut body);
        for mm in 0..m {
            out.set(mm, nn, body[mm] * scale);
        }
    }
    Ok(out)
}

/// One-tap zero-forcing equalization against a known per-entry channel
/// response.
///
/// Returns the equalized grid together with the number of entries whose
/// gain magnitude was at or below [`ZF_EPSILON`] and were therefore passed
/// through unequalized.
pub fn equalize_zf(y: &TFGrid, h: &TFGrid) -> Result<(TFGrid, usize)> {
    if y.rows() != h.rows() || y.cols() != h.cols() {
        return Err(Error::invalid(format!(
            "response dimensions {}x{} do not match frame {}x{}",
            h.rows(),
            h.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let mut out = TFGrid::zero(y.rows(), y.cols());
    let mut skipped = 0usize;
    for mm in 0..y.rows() {
        for nn in 0..y.cols() {
            let g = h.get(mm, nn);
            if g.norm_sqr() <= ZF_EPSILON * ZF_EPSILON {
                out.set(mm, nn, y.get(mm, nn));
                skipped += 1;
            } else {
                out.set(mm, nn, y.get(mm, nn) / g);
            }
        }
    }
    Ok((out, skipped))
}

// ─────────────────────────────────────────────────────────────────────────
