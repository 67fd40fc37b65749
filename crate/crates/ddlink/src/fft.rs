//! Internal FFT plumbing: cached plans plus operation accounting.
//!
//! All transforms in the crate funnel through these two functions so that
//! (a) plans are created once per thread per length and (b) every
//! invocation lands in the [`crate::ops`] tally. Both directions are
//! unnormalized, matching the underlying library; callers own their scale
//! factors.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::ops;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache::default());
}

#[derive(Default)]
struct PlanCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn process(data: &mut [Complex64], inverse: bool) {
    let len = data.len();
    if len < 2 {
        return;
    }
    PLANS.with(|cell| {
        let mut cache = cell.borrow_mut();
        let cache = &mut *cache;
        let map = if inverse { &mut cache.inverse } else { &mut cache.forward };
        let plan = map.entry(len).or_insert_with(|| {
            if inverse {
                cache.planner.plan_fft_inverse(len)
            } else {
                cache.planner.plan_fft_forward(len)
            }
        });
        plan.process(data);
    });
    ops::record_fft(len);
}

/// In-place forward DFT, `X[k] = sum_q x[q] exp(-j 2 pi k q / len)`.
pub(crate) fn forward(data: &mut [Complex64]) {
    process(data, false);
}

/// In-place inverse DFT without the `1/len` factor,
/// `x[q] = sum_k X[k] exp(+j 2 pi k q / len)`.
pub(crate) fn inverse(data: &mut [Complex64]) {
    process(data, true);
}

// ─────────────────────────────────────────────────────────────────────────
