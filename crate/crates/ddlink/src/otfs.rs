//! Delay-Doppler modulation on top of the multicarrier core, and the
//! linear detector that inverts the channel in that domain.
//!
//! Transmit is precode-then-multicarrier: the delay-Doppler grid goes
//! through the inverse symplectic transform onto the time-frequency grid
//! and from there through the per-symbol multicarrier modulator. Receive
//! mirrors it. With rectangular pulses the cascade collapses to a tidy
//! identity: body sample `p` of symbol `n` is
//!
//! ```text
//! x_n[p] = (1/sqrt(N)) sum_k x_dd[p, k] * exp(j 2 pi n k / N)
//! ```
//!
//! so the delay axis is literally the within-symbol sample index and the
//! Doppler axis is a DFT across symbols. One consequence is frozen into
//! the tests here: a single path with delay `l0` samples (inside the CP)
//! and Doppler exactly `k0` chain bins ([`LinkParams::doppler_bin_hz`])
//! turns the received grid into a cyclically shifted, per-delay-phased
//! copy of the transmitted one,
//!
//! ```text
//! y_dd[l, k] = a * exp(j 2 pi nu T_s (cp_len - l0 + l))
//!              * x_dd[(l - l0) mod M, (k - k0) mod N]
//! ```
//!
//! which is why every path of a mobile channel stays a compact, nearly
//! unit-modulus feature in this domain while the same channel smears
//! arbitrarily across time-frequency cells.
//!
//! [`effective_channel`] materializes the full end-to-end linear map (the
//! channel is linear, so probing one unit impulse per grid cell recovers
//! it column by column), and [`equalize_lmmse`] solves the regularized
//! normal equations against it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{self, ChannelRealization};
use crate::error::{Error, Result};
use crate::grid::{DDGrid, TimeSignal};
use crate::ofdm;
use crate::params::LinkParams;
use crate::transforms;

/// Delay-Doppler grid to time samples: inverse symplectic transform, then
/// per-symbol multicarrier modulation with cyclic prefixes.
pub fn modulate(x: &DDGrid, p: &LinkParams) -> Result<TimeSignal> {
    ofdm::modulate(&transforms::isfft(x, p)?, p)
}

/// Time samples back to the delay-Doppler grid. Exact inverse of
/// [`modulate`] in the absence of a channel.
pub fn demodulate(s: &TimeSignal, p: &LinkParams) -> Result<DDGrid> {
    transforms::sfft(&ofdm::demodulate(s, p)?, p)
}

/// End-to-end delay-Doppler channel matrix `H` with `y = H x` for grids
/// flattened column-major (delay index fastest), obtained by sending one
/// unit impulse per grid cell through modulate, channel, demodulate.
///
/// `M * N` chain evaluations: meant to run once per channel realization,
/// not per frame.
pub fn effective_channel(ch: &ChannelRealization, p: &LinkParams) -> Result<DMatrix<Complex64>> {
    let mn = p.m() * p.n();
    let mut h = DMatrix::zeros(mn, mn);
    for kk in 0..p.n() {
        for ll in 0..p.m() {
            let probe = DDGrid::unit_impulse(p.m(), p.n(), ll, kk);
            let received = demodulate(&channel::apply(&modulate(&probe, p)?, ch, p)?, p)?;
            let col = received.to_col_major_vec();
            let j = ll + kk * p.m();
            for (i, value) in col.into_iter().enumerate() {
                h[(i, j)] = value;
            }
        }
    }
    Ok(h)
}

/// Linear MMSE detection: solves `(H^H H + noise_var I) x = H^H y` by
/// Cholesky factorization. With `noise_var = 0` this is zero-forcing and
/// fails with [`Error::Singular`] when the channel does not have full
/// column rank.
///
/// No bias correction is applied, so through an identity channel the
/// output is the shrunk `y / (1 + noise_var)`.
pub fn equalize_lmmse(y: &DDGrid, h: &DMatrix<Complex64>, noise_var: f64) -> Result<DDGrid> {
    let mn = y.rows() * y.cols();
    if h.nrows() != mn || h.ncols() != mn {
        return Err(Error::invalid(format!(
            "channel matrix is {}x{}, grid needs {mn}x{mn}",
            h.nrows(),
            h.ncols()
        )));
    }
    if !noise_var.is_finite() || noise_var < 0.0 {
        return Err(Error::invalid(format!("noise_var must be finite and >= 0, got {noise_var}")));
    }
    let y_vec = DMatrix::from_column_slice(mn, 1, &y.to_col_major_vec());
    let mut normal = h.adjoint() * h;
    for i in 0..mn {
        normal[(i, i)] += Complex64::new(noise_var, 0.0);
    }
    let rhs = h.adjoint() * y_vec;
    let chol = normal
        .cholesky()
        .ok_or_else(|| Error::Singular("regularized normal matrix is not positive definite".to_string()))?;
    let x = chol.solve(&rhs);
    let entries: Vec<Complex64> = x.column(0).iter().copied().collect();
    DDGrid::from_col_major_vec(y.rows(), y.cols(), &entries)
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{PathSpec, Profile};
    use crate::testutil::{random_dd_grid, reference_params, rng};
    use std::f64::consts::TAU;

    const EXACT_TOL: f64 = 1e-9;

    #[test]
    fn modulate_demodulate_round_trip_is_exact() {
        let p = reference_params();
        let x = random_dd_grid(&p, &mut rng(0x07F5));
        let back = demodulate(&modulate(&x, &p).unwrap(), &p).unwrap();
        for ll in 0..p.m() {
            for kk in 0..p.n() {
                assert!((back.get(ll, kk) - x.get(ll, kk)).norm() < 1e-12, "({ll},{kk})");
            }
        }
    }

    #[test]
    fn transmit_samples_match_the_per_symbol_dft_identity() {
        // Body sample p of symbol n must be the N-point inverse DFT of
        // delay row p, independent of the two-transform route taken.
        let p = reference_params();
        let x = random_dd_grid(&p, &mut rng(0x1DE0));
        let s = modulate(&x, &p).unwrap();
        let scale = 1.0 / (p.n() as f64).sqrt();
        for nn in 0..p.n() {
            for pp in 0..p.m() {
                let q = nn * p.slot_len() + p.cp_len() + pp;
                let mut want = Complex64::new(0.0, 0.0);
                for kk in 0..p.n() {
                    want += x.get(pp, kk)
                        * Complex64::from_polar(1.0, TAU * (nn * kk) as f64 / p.n() as f64);
                }
                want *= scale;
                assert!((s.samples()[q] - want).norm() < 1e-11, "symbol {nn} sample {pp}");
            }
        }
    }

    #[test]
    fn integer_bin_path_is_an_exact_cyclic_shift() {
        // Single path, delay l0 samples inside the CP, Doppler exactly k0
        // chain bins: the received grid is the transmitted grid cyclically
        // shifted by (l0, k0) with a unit-modulus per-delay phase. This is
        // the property that makes delay-Doppler channels sparse.
        let p = LinkParams::new(16, 8, 15e3, 0.95e9, 4).unwrap();
        let (l0, k0) = (3usize, 5usize);
        let nu = k0 as f64 * p.doppler_bin_hz();
        let gain = Complex64::new(0.6, -0.75);
        let ch = ChannelRealization::new(
            vec![PathSpec { gain, delay_s: l0 as f64 * p.sample_period(), doppler_hz: nu }],
            &p,
        )
        .unwrap();
        let x = random_dd_grid(&p, &mut rng(0xCE11));
        let y = demodulate(&channel::apply(&modulate(&x, &p).unwrap(), &ch, &p).unwrap(), &p).unwrap();
        let ts = p.sample_period();
        for ll in 0..p.m() {
            let phase = TAU * nu * ts * (p.cp_len() as f64 - l0 as f64 + ll as f64);
            let factor = gain * Complex64::from_polar(1.0, phase);
            for kk in 0..p.n() {
                let src = x.get((ll + p.m() - l0) % p.m(), (kk + p.n() - k0) % p.n());
                assert!((y.get(ll, kk) - factor * src).norm() < EXACT_TOL, "({ll},{kk})");
            }
        }
        // Unit-modulus factor: the shift moves energy without scaling it.
        assert!((y.energy() - gain.norm_sqr() * x.energy()).abs() < 1e-9);
    }

    #[test]
    fn effective_channel_reproduces_the_chain() {
        let p = reference_params();
        let ch = Profile::Eva.draw(500.0 / 3.6, &p, &mut rng(0xEFF)).unwrap();
        let h = effective_channel(&ch, &p).unwrap();
        let x = random_dd_grid(&p, &mut rng(0xEFF1));
        let y = demodulate(&channel::apply(&modulate(&x, &p).unwrap(), &ch, &p).unwrap(), &p).unwrap();
        let x_vec = DMatrix::from_column_slice(p.m() * p.n(), 1, &x.to_col_major_vec());
        let y_from_h = &h * x_vec;
        for (i, &want) in y.to_col_major_vec().iter().enumerate() {
            assert!((y_from_h[(i, 0)] - want).norm() < EXACT_TOL, "entry {i}");
        }
    }

    #[test]
    fn zero_forcing_recovers_the_grid_through_a_faded_channel() {
        let p = reference_params();
        let ch = Profile::Eva.draw(200.0 / 3.6, &p, &mut rng(0x2F0)).unwrap();
        let h = effective_channel(&ch, &p).unwrap();
        let x = random_dd_grid(&p, &mut rng(0x2F1));
        let y = demodulate(&channel::apply(&modulate(&x, &p).unwrap(), &ch, &p).unwrap(), &p).unwrap();
        let x_hat = equalize_lmmse(&y, &h, 0.0).unwrap();
        for ll in 0..p.m() {
            for kk in 0..p.n() {
                assert!((x_hat.get(ll, kk) - x.get(ll, kk)).norm() < 1e-7, "({ll},{kk})");
            }
        }
    }

    #[test]
    fn lmmse_satisfies_the_normal_equations() {
        let p = reference_params();
        let ch = Profile::Eva.draw(120.0 / 3.6, &p, &mut rng(0x30A)).unwrap();
        let h = effective_channel(&ch, &p).unwrap();
        let noise_var = 0.2;
        let y = random_dd_grid(&p, &mut rng(0x30B));
        let x_hat = equalize_lmmse(&y, &h, noise_var).unwrap();
        let mn = p.m() * p.n();
        let x_vec = DMatrix::from_column_slice(mn, 1, &x_hat.to_col_major_vec());
        let y_vec = DMatrix::from_column_slice(mn, 1, &y.to_col_major_vec());
        let lhs = h.adjoint() * (&h * &x_vec) + noise_var * &x_vec;
        let rhs = h.adjoint() * y_vec;
        for i in 0..mn {
            assert!((lhs[(i, 0)] - rhs[(i, 0)]).norm() < 1e-9, "row {i}");
        }
    }

    #[test]
    fn identity_channel_shrinks_by_the_regularizer() {
        let p = reference_params();
        let mn = p.m() * p.n();
        let h = DMatrix::identity(mn, mn);
        let y = random_dd_grid(&p, &mut rng(0x1D));
        let noise_var = 0.5;
        let x_hat = equalize_lmmse(&y, &h, noise_var).unwrap();
        for ll in 0..p.m() {
            for kk in 0..p.n() {
                let want = y.get(ll, kk) / (1.0 + noise_var);
                assert!((x_hat.get(ll, kk) - want).norm() < 1e-12, "({ll},{kk})");
            }
        }
    }

    #[test]
    fn rank_deficient_zero_forcing_reports_singular() {
        let p = reference_params();
        let mn = p.m() * p.n();
        let h = DMatrix::zeros(mn, mn);
        let y = random_dd_grid(&p, &mut rng(0x51));
        assert!(matches!(equalize_lmmse(&y, &h, 0.0), Err(Error::Singular(_))));
    }

    #[test]
    fn equalizer_rejects_mismatched_dimensions() {
        let p = reference_params();
        let h = DMatrix::identity(4, 4);
        let y = random_dd_grid(&p, &mut rng(0x52));
        assert!(matches!(equalize_lmmse(&y, &h, 0.0), Err(Error::InvalidArgument(_))));
        let h2 = DMatrix::identity(p.m() * p.n(), p.m() * p.n());
        assert!(matches!(equalize_lmmse(&y, &h2, -0.1), Err(Error::InvalidArgument(_))));
    }
}
