//! Measured-versus-predicted transform complexity.
//!
//! The report instruments three operations at the configured grid size
//! and again with both grid dimensions doubled, using the crate's FFT
//! tally ([`crate::ops`]):
//!
//! * one multicarrier frame (modulate + demodulate): `2N` FFTs of length
//!   `M`, so doubling predicts a `4 log2(2M) / log2(M)` multiply ratio;
//! * one delay-Doppler frame (modulate + demodulate): the two symplectic
//!   transforms add `MN log2(MN)` on top of the multicarrier core, total
//!   `MN (log2(MN) + log2 M)`, modeled as `MN log2(MN)` growth, so
//!   doubling predicts `4 log2(4MN) / log2(MN)`;
//! * one matched-filter search: three two-dimensional FFTs, exactly
//!   `(3MN/2) log2(MN)` multiplies, same predicted ratio as above.
//!
//! Measured ratios land near but not exactly on the predictions (the
//! delay-Doppler frame carries the multicarrier term the model drops);
//! the point of the report is that they agree to first order, which is
//! the evidence that the fast paths scale as designed rather than
//! quadratically.

use std::fmt;

use crate::error::Result;
use crate::grid::{DDGrid, TFGrid};
use crate::ofdm;
use crate::ops::{self, OpCount};
use crate::otfs;
use crate::params::LinkParams;
use crate::sensing;

/// One instrumented operation at both grid sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEntry {
    pub label: &'static str,
    pub base: OpCount,
    pub doubled: OpCount,
    /// Multiply-count ratio the scaling model predicts for doubling.
    pub predicted_ratio: f64,
}

impl ComplexityEntry {
    /// Observed multiply-count ratio between the two sizes.
    pub fn measured_ratio(&self) -> f64 {
        self.doubled.complex_mults as f64 / self.base.complex_mults as f64
    }
}

/// Transform-cost scaling report; render with `Display`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub base_dims: (usize, usize),
    pub doubled_dims: (usize, usize),
    /// `log2(M * N)` of the base grid, rounded to the nearest integer.
    pub log2_mn: u32,
    pub entries: Vec<ComplexityEntry>,
}

fn measure(f: impl FnOnce() -> Result<()>) -> Result<OpCount> {
    let before = ops::snapshot();
    f()?;
    Ok(ops::snapshot().since(before))
}

fn ofdm_frame(p: &LinkParams) -> Result<OpCount> {
    measure(|| {
        let x = TFGrid::zero(p.m(), p.n());
        let s = ofdm::modulate(&x, p)?;
        ofdm::demodulate(&s, p)?;
        Ok(())
    })
}

fn otfs_frame(p: &LinkParams) -> Result<OpCount> {
    measure(|| {
        let x = DDGrid::zero(p.m(), p.n());
        let s = otfs::modulate(&x, p)?;
        otfs::demodulate(&s, p)?;
        Ok(())
    })
}

fn mf_search_once(p: &LinkParams) -> Result<OpCount> {
    measure(|| {
        let y = DDGrid::zero(p.m(), p.n());
        sensing::mf_search(&y, p)?;
        Ok(())
    })
}

/// Instruments the three operations at `(m, n)` and `(2m, 2n)` with the
/// same prefix length and pairs the measured multiply ratios with their
/// scaling-model predictions.
pub fn count_ops_report(p: &LinkParams) -> Result<ComplexityReport> {
    let doubled =
        LinkParams::new(2 * p.m(), 2 * p.n(), p.delta_f(), p.f_c(), p.cp_len())?;
    let m = p.m() as f64;
    let mn = (p.m() * p.n()) as f64;
    let ofdm_predicted = 4.0 * (2.0 * m).log2() / m.log2();
    let dd_predicted = 4.0 * (4.0 * mn).log2() / mn.log2();
    let entries = vec![
        ComplexityEntry {
            label: "ofdm_frame",
            base: ofdm_frame(p)?,
            doubled: ofdm_frame(&doubled)?,
            predicted_ratio: ofdm_predicted,
        },
        ComplexityEntry {
            label: "otfs_frame",
            base: otfs_frame(p)?,
            doubled: otfs_frame(&doubled)?,
            predicted_ratio: dd_predicted,
        },
        ComplexityEntry {
            label: "mf_search",
            base: mf_search_once(p)?,
            doubled: mf_search_once(&doubled)?,
            predicted_ratio: dd_predicted,
        },
    ];
    Ok(ComplexityReport {
        base_dims: (p.m(), p.n()),
        doubled_dims: (doubled.m(), doubled.n()),
        log2_mn: mn.log2().round() as u32,
        entries,
    })
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "transform cost scaling, {}x{} -> {}x{} (log2 MN = {})",
            self.base_dims.0, self.base_dims.1, self.doubled_dims.0, self.doubled_dims.1, self.log2_mn
        )?;
        writeln!(
            f,
            "{:<12} {:>12} {:>10} {:>14} {:>12} {:>10} {:>10}",
            "operation", "base mults", "base ffts", "doubled mults", "doubled ffts", "measured", "predicted"
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "{:<12} {:>12} {:>10} {:>14} {:>12} {:>10.4} {:>10.4}",
                e.label,
                e.base.complex_mults,
                e.base.fft_calls,
                e.doubled.complex_mults,
                e.doubled.fft_calls,
                e.measured_ratio(),
                e.predicted_ratio,
            )?;
        }
        Ok(())
    }
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::reference_params;

    #[test]
    fn reference_frame_costs_match_the_radix2_model() {
        let report = count_ops_report(&reference_params()).unwrap();
        let by_label = |label: &str| {
            report.entries.iter().find(|e| e.label == label).copied().unwrap()
        };
        // Multicarrier frame: 2N FFTs of length M = 16 calls, 512 mults.
        let ofdm = by_label("ofdm_frame");
        assert_eq!(ofdm.base.fft_calls, 16);
        assert_eq!(ofdm.base.complex_mults, 512);
        assert_eq!(ofdm.doubled.complex_mults, 2560);
        // Delay-Doppler frame adds both symplectic transforms: 1408 mults.
        let dd = by_label("otfs_frame");
        assert_eq!(dd.base.complex_mults, 1408);
        assert_eq!(dd.doubled.complex_mults, 7168);
        // Matched filter: three 2-D FFTs, (3MN/2) log2(MN) = 1344 mults.
        let mf = by_label("mf_search");
        assert_eq!(mf.base.complex_mults, 1344);
        assert_eq!(mf.doubled.complex_mults, 6912);
        assert_eq!(report.log2_mn, 7);
    }

    #[test]
    fn measured_ratios_stay_within_a_quarter_of_predictions() {
        let report = count_ops_report(&reference_params()).unwrap();
        for e in &report.entries {
            let measured = e.measured_ratio();
            assert!(
                (measured - e.predicted_ratio).abs() <= 0.25 * e.predicted_ratio,
                "{}: measured {measured}, predicted {}",
                e.label,
                e.predicted_ratio
            );
        }
    }

    #[test]
    fn display_renders_one_line_per_entry() {
        let report = count_ops_report(&reference_params()).unwrap();
        let text = report.to_string();
        assert!(text.contains("ofdm_frame"));
        assert!(text.contains("otfs_frame"));
        assert!(text.contains("mf_search"));
        assert!(text.contains("16x8 -> 32x16"));
    }
}
