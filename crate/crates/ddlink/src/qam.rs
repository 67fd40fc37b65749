//! Gray-coded square QAM mapping between bits and unit-energy complex
//! symbols.
//!
//! Supported orders are 4 and 16. A symbol carries `log2(order)` bits in
//! transmission order `[b0, b1, ...]`: the first half selects the in-phase
//! level (b0 most significant), the second half the quadrature level. Each
//! axis uses the reflected Gray sequence over its amplitude levels:
//!
//! ```text
//! 4-QAM   axis bit   0 -> +1    1 -> -1          scale 1/sqrt(2)
//! 16-QAM  axis bits 00 -> +3   01 -> +1
//!                   11 -> -1   10 -> -3          scale 1/sqrt(10)
//! ```
//!
//! so bits `00` map to `(+1+j)/sqrt(2)` and bits `0000` to
//! `(3+3j)/sqrt(10)`. With these scales every constellation has unit mean
//! symbol energy, which keeps per-sample SNR equal to symbol `Es/N0`
//! through the unitary modulators. Neighboring points along either axis
//! differ in exactly one bit, the property that makes Gray mapping worth
//! the bookkeeping.
//!
//! Hard demodulation is a minimum-Euclidean-distance search over the full
//! constellation; exact distance ties resolve to the lowest constellation
//! index (the index of a point is its bit pattern read as a big-endian
//! integer).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Supported modulation orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qam4,
    Qam16,
}

impl Modulation {
    /// Constellation size.
    pub fn order(&self) -> usize {
        match self {
            Modulation::Qam4 => 4,
            Modulation::Qam16 => 16,
        }
    }

    /// Bits carried per symbol: `log2(order)`.
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Modulation::Qam4 => 2,
            Modulation::Qam16 => 4,
        }
    }

    /// Per-axis amplitude scale making mean symbol energy exactly 1.
    fn scale(&self) -> f64 {
        match self {
            Modulation::Qam4 => 1.0 / 2f64.sqrt(),
            Modulation::Qam16 => 1.0 / 10f64.sqrt(),
        }
    }

    /// Gray-decoded amplitude level for one axis of the constellation.
    /// `bits` holds the axis bits MSB first.
    fn axis_level(&self, bits: &[u8]) -> f64 {
        match self {
            Modulation::Qam4 => match bits {
                [0] => 1.0,
                _ => -1.0,
            },
            Modulation::Qam16 => match bits {
                [0, 0] => 3.0,
                [0, 1] => 1.0,
                [1, 1] => -1.0,
                _ => -3.0,
            },
        }
    }

    /// The full constellation, indexed by bit pattern (big-endian).
    pub fn constellation(&self) -> Vec<Complex64> {
        let bps = self.bits_per_symbol();
        (0..self.order())
            .map(|idx| {
                let bits: Vec<u8> =
                    (0..bps).map(|b| ((idx >> (bps - 1 - b)) & 1) as u8).collect();
                self.map_symbol(&bits)
            })
            .collect()
    }

    /// Maps one symbol's bits (length `bits_per_symbol`) to its point.
    fn map_symbol(&self, bits: &[u8]) -> Complex64 {
        let half = self.bits_per_symbol() / 2;
        let i = self.axis_level(&bits[..half]);
        let q = self.axis_level(&bits[half..]);
        Complex64::new(i, q) * self.scale()
    }
}

impl TryFrom<u32> for Modulation {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            4 => Ok(Modulation::Qam4),
            16 => Ok(Modulation::Qam16),
            other => Err(Error::invalid(format!(
                "unsupported modulation order {other}; supported: 4, 16"
            ))),
        }
    }
}

/// Maps a bit sequence (values 0/1) onto constellation symbols.
///
/// The bit count must be a multiple of `bits_per_symbol`.
pub fn modulate(bits: &[u8], m: Modulation) -> Result<Vec<Complex64>> {
    let bps = m.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(Error::invalid(format!(
            "bit count {} is not a multiple of {} bits per symbol",
            bits.len(),
            bps
        )));
    }
    if let Some(bad) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::invalid(format!("bits must be 0 or 1, got {bad}")));
    }
    Ok(bits.chunks_exact(bps).map(|chunk| m.map_symbol(chunk)).collect())
}

/// Hard-decision demodulation: nearest constellation point per symbol,
/// ties to the lowest index. Output length is
/// `symbols.len() * bits_per_symbol`.
pub fn demodulate_hard(symbols: &[Complex64], m: Modulation) -> Vec<u8> {
    let points = m.constellation();
    let bps = m.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * bps);
    for &s in symbols {
        let mut best_idx = 0usize;
        let mut best_d = f64::INFINITY;
        for (idx, &pt) in points.iter().enumerate() {
            let d = (s - pt).norm_sqr();
            // Strict comparison keeps the earliest (lowest) index on ties.
            if d < best_d {
                best_d = d;
                best_idx = idx;
            }
        }
        for b in 0..bps {
            bits.push(((best_idx >> (bps - 1 - b)) & 1) as u8);
        }
    }
    bits
}

// ─────────────────────────────────────────────────────────────────────────
