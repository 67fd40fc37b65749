//! The symplectic transform pair connecting the delay-Doppler and
//! time-frequency domains.
//!
//! Forward (delay-Doppler to time-frequency):
//!
//! ```text
//! X_tf[m', n'] = 1/sqrt(M*N) * sum_{l=0}^{M-1} sum_{k=0}^{N-1}
//!                x[l, k] * exp(+j 2 pi (n' k / N  -  m' l / M))
//! ```
//!
//! [`sfft`] is the exact inverse: the same double sum with the conjugated
//! kernel. Both carry the symmetric `1/sqrt(M*N)` factor, so each direction
//! is unitary and energy moves between domains unchanged.
//!
//! Internally the double sum factors into an inverse DFT of length `n`
//! along every delay row followed by a forward DFT of length `m` along
//! every Doppler-transformed column (and the mirror image for [`sfft`]),
//! which is how the `O(M N log(M N))` cost arises.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{DDGrid, TFGrid};
use crate::params::LinkParams;

fn check_dims(rows: usize, cols: usize, p: &LinkParams, what: &str) -> Result<()> {
    if rows != p.m() || cols != p.n() {
        return Err(Error::invalid(format!(
            "{what} must be {}x{} for these link parameters, got {rows}x{cols}",
            p.m(),
            p.n()
        )));
    }
    Ok(())
}

/// Maps a delay-Doppler frame onto the time-frequency grid.
///
/// Unitary; output dimensions equal input dimensions (`m x n`).
pub fn isfft(x: &DDGrid, p: &LinkParams) -> Result<TFGrid> {
    check_dims(x.rows(), x.cols(), p, "delay-Doppler grid")?;
    let (m, n) = (p.m(), p.n());
    let scale = 1.0 / ((m * n) as f64).sqrt();

    // Inverse DFT across Doppler, one pass per delay row.
    let mut rowbuf = vec![Complex64::default(); n];
    let mut mid = vec![Complex64::default(); m * n];
    for l in 0..m {
        for k in 0..n {
            rowbuf[k] = x.get(l, k);
        }
        fft::inverse(&mut rowbuf);
        mid[l * n..(l + 1) * n].copy_from_slice(&rowbuf);
    }

    // Forward DFT across delay, one pass per symbol column.
    let mut colbuf = vec![Complex64::default(); m];
    let mut out = TFGrid::zero(m, n);
    for nn in 0..n {
        for l in 0..m {
            colbuf[l] = mid[l * n + nn];
        }
        fft::forward(&mut colbuf);
        for mm in 0..m {
            out.set(mm, nn, colbuf[mm] * scale);
        }
    }
    Ok(out)
}

/// Maps a time-frequency frame back onto the delay-Doppler grid.
///
/// Exact inverse of [`isfft`]; unitary.
pub fn sfft(y: &TFGrid, p: &LinkParams) -> Result<DDGrid> {
    check_dims(y.rows(), y.cols(), p, "time-frequency grid")?;
    let (m, n) = (p.m(), p.n());
    let scale = 1.0 / ((m * n) as f64).sqrt();

    // Inverse DFT across frequency, one pass per symbol column.
    let mut colbuf = vec![Complex64::default(); m];
    let mut mid = vec![Complex64::default(); m * n];
    for nn in 0..n {
        for mm in 0..m {
            colbuf[mm] = y.get(mm, nn);
        }
        fft::inverse(&mut colbuf);
        for l in 0..m {
            mid[l * n + nn] = colbuf[l];
        }
    }

    // Forward DFT across time, one pass per delay row.
    let mut rowbuf = vec![Complex64::default(); n];
    let mut out = DDGrid::zero(m, n);
    for l in 0..m {
        rowbuf.copy_from_slice(&mid[l * n..(l + 1) * n]);
        fft::forward(&mut rowbuf);
        for k in 0..n {
            out.set(l, k, rowbuf[k] * scale);
        }
    }
    Ok(out)
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_dd_grid, reference_params, rng};
    use std::f64::consts::TAU;

    /// Independent oracle: the O(M^2 N^2) double sum, evaluated term by
    /// term with no FFT shortcuts. Kept deliberately naive so it shares no
    /// code path with the implementation.
    fn isfft_double_sum(x: &DDGrid, m: usize, n: usize) -> TFGrid {
        let scale = 1.0 / ((m * n) as f64).sqrt();
        TFGrid::from_fn(m, n, |mm, nn| {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..m {
                for k in 0..n {
                    let phase = TAU * (nn * k) as f64 / n as f64 - TAU * (mm * l) as f64 / m as f64;
                    acc += x.get(l, k) * Complex64::from_polar(1.0, phase);
                }
            }
            acc * scale
        })
    }

    fn sfft_double_sum(y: &TFGrid, m: usize, n: usize) -> DDGrid {
        let scale = 1.0 / ((m * n) as f64).sqrt();
        DDGrid::from_fn(m, n, |l, k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for mm in 0..m {
                for nn in 0..n {
                    let phase = TAU * (nn * k) as f64 / n as f64 - TAU * (mm * l) as f64 / m as f64;
                    acc += y.get(mm, nn) * Complex64::from_polar(1.0, -phase);
                }
            }
            acc * scale
        })
    }

    const ORACLE_TOL: f64 = 1e-12;

    #[test]
    fn isfft_matches_double_sum_oracle_on_random_grid() {
        let p = reference_params();
        let x = random_dd_grid(&p, &mut rng(0x15F7));
        let fast = isfft(&x, &p).unwrap();
        let slow = isfft_double_sum(&x, p.m(), p.n());
        for mm in 0..p.m() {
            for nn in 0..p.n() {
                assert!(
                    (fast.get(mm, nn) - slow.get(mm, nn)).norm() < ORACLE_TOL,
                    "mismatch at ({mm},{nn})"
                );
            }
        }
    }

    #[test]
    fn sfft_matches_double_sum_oracle_on_random_grid() {
        let p = reference_params();
        let x = random_dd_grid(&p, &mut rng(0x5FF7));
        let y = isfft(&x, &p).unwrap();
        let fast = sfft(&y, &p).unwrap();
        let slow = sfft_double_sum(&y, p.m(), p.n());
        for l in 0..p.m() {
            for k in 0..p.n() {
                assert!(
                    (fast.get(l, k) - slow.get(l, k)).norm() < ORACLE_TOL,
                    "mismatch at ({l},{k})"
                );
            }
        }
    }

    #[test]
    fn impulse_spreads_to_flat_grid_of_inverse_sqrt_mn() {
        // A unit impulse at (0,0) excites every time-frequency entry with
        // the same amplitude 1/sqrt(M*N); for 16x8 that is 1/sqrt(128).
        let p = reference_params();
        let x = DDGrid::unit_impulse(p.m(), p.n(), 0, 0);
        let y = isfft(&x, &p).unwrap();
        let want = 1.0 / 128f64.sqrt();
        for mm in 0..p.m() {
            for nn in 0..p.n() {
                let z = y.get(mm, nn);
                assert!((z.re - want).abs() < 1e-12 && z.im.abs() < 1e-12, "entry ({mm},{nn}) = {z}");
            }
        }
    }

    #[test]
    fn sfft_is_the_exact_inverse_of_isfft() {
        let p = reference_params();
        let x = random_dd_grid(&p, &mut rng(0xD00D));
        let back = sfft(&isfft(&x, &p).unwrap(), &p).unwrap();
        for l in 0..p.m() {
            for k in 0..p.n() {
                assert!((back.get(l, k) - x.get(l, k)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn both_directions_preserve_energy() {
        let p = reference_params();
        for seed in 0..20u64 {
            let x = random_dd_grid(&p, &mut rng(0xE0 + seed));
            let y = isfft(&x, &p).unwrap();
            let rel = (y.energy() - x.energy()).abs() / x.energy();
            assert!(rel < 1e-12, "energy drift {rel}");
            let z = sfft(&y, &p).unwrap();
            let rel = (z.energy() - y.energy()).abs() / y.energy();
            assert!(rel < 1e-12, "energy drift {rel}");
        }
    }

    #[test]
    fn transform_is_linear() {
        let p = reference_params();
        let mut r = rng(0x11EA);
        let a = random_dd_grid(&p, &mut r);
        let b = random_dd_grid(&p, &mut r);
        let alpha = Complex64::new(0.7, -1.3);
        let combo = DDGrid::from_fn(p.m(), p.n(), |l, k| alpha * a.get(l, k) + b.get(l, k));
        let lhs = isfft(&combo, &p).unwrap();
        let ya = isfft(&a, &p).unwrap();
        let yb = isfft(&b, &p).unwrap();
        for mm in 0..p.m() {
            for nn in 0..p.n() {
                let rhs = alpha * ya.get(mm, nn) + yb.get(mm, nn);
                assert!((lhs.get(mm, nn) - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = reference_params();
        let wrong = DDGrid::zero(p.m() + 1, p.n());
        assert!(isfft(&wrong, &p).is_err());
        let wrong_tf = TFGrid::zero(p.m(), p.n() - 1);
        assert!(sfft(&wrong_tf, &p).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            /// Round trip and unitarity hold for arbitrary grid shapes,
            /// not just the power-of-two reference geometry.
            #[test]
            fn round_trip_and_parseval_hold_for_arbitrary_shapes(
                m in 2usize..24,
                n in 2usize..12,
                seed in 0u64..1u64 << 48,
            ) {
                let p = LinkParams::new(m, n, 15e3, 1e9, 0).unwrap();
                let x = random_dd_grid(&p, &mut rng(seed));
                let y = isfft(&x, &p).unwrap();
                prop_assert!((y.energy() - x.energy()).abs() <= 1e-9 * x.energy());
                let back = sfft(&y, &p).unwrap();
                for l in 0..m {
                    for k in 0..n {
                        prop_assert!((back.get(l, k) - x.get(l, k)).norm() < 1e-10);
                    }
                }
            }
        }
    }
}
