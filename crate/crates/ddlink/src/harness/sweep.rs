//! Deterministic multi-threaded BER sweeps.
//!
//! A sweep is a grid of independent cells, speeds outer and SNRs inner.
//! Cell `i` gets seed `derive(master, i)` and block `t` within it seed
//! `derive(cell_seed, t)`, so a cell's result is a pure function of the
//! master seed and its position: identical no matter how many workers run
//! the sweep or which worker picks the cell up. The pool is a plain
//! work-stealing index over scoped threads; rows land in their cell's
//! slot, never in completion order.
//!
//! A cell runs whole blocks (one channel realization, a configured
//! number of frames) until the accumulated payload reaches the config's
//! `min_bits`. Block counts are derived up front from the frame size, so
//! every run of a cell does exactly the same work.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::controller::{self, LinkScenario, SwitchPolicy, WaveformChoice};
use crate::error::Result;
use crate::harness::config::{SimConfig, WaveformMode};
use crate::params::kmh_to_ms;
use crate::seed;

/// Aggregated result of one (speed, SNR) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    /// Waveform that carried the cell's blocks. For hybrid sweeps this is
    /// the majority selection (ties go to the low-speed waveform).
    pub waveform: WaveformChoice,
    pub speed_kmh: f64,
    pub mod_order: u32,
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Total data frames simulated in the cell.
    pub frames: u64,
    /// The cell's derived seed (not the master seed).
    pub seed: u64,
    /// Modeled complex multiplies over all blocks, sensing included.
    pub complex_mults: u64,
    /// FFT invocations over all blocks, sensing included.
    pub fft_calls: u64,
}

fn run_cell(cfg: &SimConfig, speed_kmh: f64, snr_db: f64, cell_seed: u64) -> Result<BerRow> {
    let p = &cfg.params;
    let scenario = LinkScenario {
        speed_ms: kmh_to_ms(speed_kmh),
        snr_db,
        sensing_snr_db: cfg.sensing.snr_db,
        modulation: cfg.modulation,
        profile: cfg.profile.clone(),
        frames: cfg.frames,
        target_range_m: cfg.sensing.target_range_m,
        tol_bins: cfg.sensing.tol_bins,
    };
    let policy = match cfg.mode {
        WaveformMode::Hybrid { threshold_kmh } => Some(SwitchPolicy::new(kmh_to_ms(threshold_kmh), 0.0)?),
        WaveformMode::Fixed(_) => None,
    };
    let bits_per_block =
        (cfg.frames * p.m() * p.n() * cfg.modulation.bits_per_symbol()) as u64;
    let blocks = cfg.min_bits.div_ceil(bits_per_block).max(1);

    let mut bits = 0u64;
    let mut bit_errors = 0u64;
    let mut complex_mults = 0u64;
    let mut fft_calls = 0u64;
    let mut otfs_blocks = 0u64;
    for t in 0..blocks {
        let block_seed = seed::derive(cell_seed, t);
        let report = match cfg.mode {
            WaveformMode::Fixed(w) => controller::run_fixed_link(w, &scenario, p, block_seed)?,
            WaveformMode::Hybrid { .. } => controller::run_adaptive_link(
                &scenario,
                p,
                policy.as_ref().expect("policy exists in hybrid mode"),
                block_seed,
            )?,
        };
        bits += report.bits;
        bit_errors += report.bit_errors;
        complex_mults += report.sensing_ops.complex_mults + report.data_ops.complex_mults;
        fft_calls += report.sensing_ops.fft_calls + report.data_ops.fft_calls;
        if report.waveform == WaveformChoice::Otfs {
            otfs_blocks += 1;
        }
    }
    let waveform = if otfs_blocks * 2 > blocks { WaveformChoice::Otfs } else { WaveformChoice::Ofdm };
    Ok(BerRow {
        waveform,
        speed_kmh,
        mod_order: cfg.modulation.order(),
        snr_db,
        bits,
        bit_errors,
        ber: if bits == 0 { 0.0 } else { bit_errors as f64 / bits as f64 },
        frames: blocks * cfg.frames as u64,
        seed: cell_seed,
        complex_mults,
        fft_calls,
    })
}

/// Runs the configured sweep on `workers` threads (clamped to at least
/// one and at most one per cell). Row order is always speeds outer, SNRs
/// inner, independent of scheduling.
pub fn run_ber_sweep(cfg: &SimConfig, workers: usize) -> Result<Vec<BerRow>> {
    let cells: Vec<(f64, f64)> = cfg
        .speeds_kmh
        .iter()
        .flat_map(|&v| cfg.snrs_db.iter().map(move |&s| (v, s)))
        .collect();
    let slots: Mutex<Vec<Option<Result<BerRow>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let n_workers = workers.max(1).min(cells.len());
    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let (speed_kmh, snr_db) = cells[i];
                let row = run_cell(cfg, speed_kmh, snr_db, seed::derive(cfg.seed, i as u64));
                slots.lock().expect("sweep worker poisoned the result lock")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("sweep worker poisoned the result lock")
        .into_iter()
        .map(|slot| slot.expect("every cell ran"))
        .collect()
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    const SMALL_OFDM: &str = r#"
        [scenario]
        waveform = "ofdm"
        speeds_kmh = [3.0, 500.0]
        snr_db = [5.0, 10.0]
        seed = 42
    "#;

    #[test]
    fn rows_are_ordered_speed_outer_snr_inner() {
        let cfg = parse_config(SMALL_OFDM).unwrap();
        let rows = run_ber_sweep(&cfg, 2).unwrap();
        let grid: Vec<(f64, f64)> = rows.iter().map(|r| (r.speed_kmh, r.snr_db)).collect();
        assert_eq!(grid, vec![(3.0, 5.0), (3.0, 10.0), (500.0, 5.0), (500.0, 10.0)]);
        for row in &rows {
            assert!(row.bits >= cfg.min_bits);
            assert_eq!(row.waveform, WaveformChoice::Ofdm);
            assert_eq!(row.mod_order, 4);
            assert!((row.ber - row.bit_errors as f64 / row.bits as f64).abs() < 1e-18);
            assert!(row.fft_calls > 0);
        }
        // Cell seeds are derived, position-dependent, all distinct.
        let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), rows.len());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = parse_config(SMALL_OFDM).unwrap();
        let serial = run_ber_sweep(&cfg, 1).unwrap();
        let parallel = run_ber_sweep(&cfg, 4).unwrap();
        let oversubscribed = run_ber_sweep(&cfg, 64).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial, oversubscribed);
    }

    #[test]
    fn hybrid_rows_record_the_majority_waveform() {
        let cfg = parse_config(
            r#"
            [scenario]
            waveform = "hybrid"
            threshold_kmh = 120.0
            speeds_kmh = [3.0, 500.0]
            snr_db = [10.0]
            "#,
        )
        .unwrap();
        let rows = run_ber_sweep(&cfg, 2).unwrap();
        assert_eq!(rows[0].waveform, WaveformChoice::Ofdm, "walking speed stays on the cheap waveform");
        assert_eq!(rows[1].waveform, WaveformChoice::Otfs, "rail speed switches");
    }
}
