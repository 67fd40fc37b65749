//! Operation accounting for complexity reports.
//!
//! Every FFT the crate executes (directly or inside a transform pair) is
//! recorded in a thread-local tally: one invocation, plus a radix-2
//! complex-multiply model of `(len/2) * log2(len)` for that length. The
//! model is what standard complexity tables charge an FFT, so instrumented
//! totals can be compared directly against `N log N`-style predictions;
//! non-transform work (channel taps, matrix solves) is deliberately outside
//! the tally.
//!
//! The tally is thread-local so concurrent sweep workers never see each
//! other's counts: a worker resets the tally, runs one cell to completion,
//! and snapshots the delta. Within a thread the counts are exact and
//! deterministic.

use std::cell::Cell;

/// Snapshot of the thread's accumulated transform work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    /// Number of FFT invocations of any length.
    pub fft_calls: u64,
    /// Modeled complex multiplies: `(len/2) * log2(len)` per invocation.
    pub complex_mults: u64,
}

impl OpCount {
    /// Entrywise difference, for deltas between two snapshots.
    pub fn since(&self, earlier: OpCount) -> OpCount {
        OpCount {
            fft_calls: self.fft_calls - earlier.fft_calls,
            complex_mults: self.complex_mults - earlier.complex_mults,
        }
    }
}

thread_local! {
    static FFT_CALLS: Cell<u64> = const { Cell::new(0) };
    static COMPLEX_MULTS: Cell<u64> = const { Cell::new(0) };
}

/// Radix-2 complex-multiply model for one FFT of `len` points. Exact for
/// powers of two; rounded for other lengths.
pub fn fft_cost_model(len: usize) -> u64 {
    if len < 2 {
        return 0;
    }
    ((len as f64 / 2.0) * (len as f64).log2()).round() as u64
}

/// Records one FFT invocation of `len` points into the thread tally.
pub(crate) fn record_fft(len: usize) {
    FFT_CALLS.with(|c| c.set(c.get() + 1));
    COMPLEX_MULTS.with(|c| c.set(c.get() + fft_cost_model(len)));
}

/// Current thread tally.
pub fn snapshot() -> OpCount {
    OpCount {
        fft_calls: FFT_CALLS.with(Cell::get),
        complex_mults: COMPLEX_MULTS.with(Cell::get),
    }
}

/// Zeroes the thread tally.
pub fn reset() {
    FFT_CALLS.with(|c| c.set(0));
    COMPLEX_MULTS.with(|c| c.set(0));
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_model_matches_radix2_formula_for_powers_of_two() {
        assert_eq!(fft_cost_model(16), 8 * 4);
        assert_eq!(fft_cost_model(8), 4 * 3);
        assert_eq!(fft_cost_model(128), 64 * 7);
        assert_eq!(fft_cost_model(1), 0);
    }

    #[test]
    fn tally_accumulates_and_resets() {
        reset();
        record_fft(16);
        record_fft(8);
        let s = snapshot();
        assert_eq!(s.fft_calls, 2);
        assert_eq!(s.complex_mults, 32 + 12);
        let before = snapshot();
        record_fft(16);
        let delta = snapshot().since(before);
        assert_eq!(delta.fft_calls, 1);
        assert_eq!(delta.complex_mults, 32);
        reset();
        assert_eq!(snapshot(), OpCount::default());
    }
}
