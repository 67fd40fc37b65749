//! Frame containers: delay-Doppler grids, time-frequency grids, and sampled
//! time-domain signals.
//!
//! Both grid types are `rows x cols` complex matrices stored row-major:
//!
//! * [`DDGrid`] — rows index delay `l in [0, m)`, columns index Doppler
//!   `k in [0, n)`.
//! * [`TFGrid`] — rows index subcarrier `m in [0, m)`, columns index the
//!   symbol slot `n in [0, n)`.
//!
//! They are distinct types on purpose: the transforms between the two
//! domains are easy to misplace in a pipeline, and a shared "matrix" type
//! would let a delay-Doppler frame flow into an OFDM-only operation
//! unnoticed.
//!
//! The on-disk form of a grid is its row-major entries as little-endian
//! `f64` pairs (re, im), 16 bytes per entry, no header. Dimensions travel
//! out of band; readers supply them to [`DDGrid::from_le_bytes`] /
//! [`TFGrid::from_le_bytes`].

use num_complex::Complex64;

use crate::error::{Error, Result};

macro_rules! grid_type {
    ($name:ident, $rows_doc:literal, $cols_doc:literal) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            rows: usize,
            cols: usize,
            data: Vec<Complex64>,
        }

        impl $name {
            /// All-zero grid.
            pub fn zero(rows: usize, cols: usize) -> Self {
                assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
                Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
            }

            /// Builds a grid by evaluating `f(row, col)` at every entry.
            pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
                let mut g = Self::zero(rows, cols);
                for r in 0..rows {
                    for c in 0..cols {
                        g.data[r * cols + c] = f(r, c);
                    }
                }
                g
            }

            /// Grid with a single unit entry at `(row, col)`, zeros elsewhere.
            pub fn unit_impulse(rows: usize, cols: usize, row: usize, col: usize) -> Self {
                assert!(row < rows && col < cols, "impulse position out of range");
                let mut g = Self::zero(rows, cols);
                g.data[row * cols + col] = Complex64::new(1.0, 0.0);
                g
            }

            #[doc = $rows_doc]
            pub fn rows(&self) -> usize {
                self.rows
            }

            #[doc = $cols_doc]
            pub fn cols(&self) -> usize {
                self.cols
            }

            /// Entry at `(row, col)`. Panics if out of range.
            #[inline]
            pub fn get(&self, row: usize, col: usize) -> Complex64 {
                assert!(row < self.rows && col < self.cols, "grid index out of range");
                self.data[row * self.cols + col]
            }

            /// Overwrites the entry at `(row, col)`. Panics if out of range.
            #[inline]
            pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
                assert!(row < self.rows && col < self.cols, "grid index out of range");
                self.data[row * self.cols + col] = v;
            }

            /// Row-major view of the entries.
            pub fn as_slice(&self) -> &[Complex64] {
                &self.data
            }

            /// Mutable row-major view of the entries.
            pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
                &mut self.data
            }

            /// Sum of squared magnitudes over all entries.
            pub fn energy(&self) -> f64 {
                self.data.iter().map(|z| z.norm_sqr()).sum()
            }

            /// Entries flattened column-major (row index varies fastest),
            /// the vectorization used when a grid meets a matrix operator.
            pub fn to_col_major_vec(&self) -> Vec<Complex64> {
                let mut v = Vec::with_capacity(self.rows * self.cols);
                for c in 0..self.cols {
                    for r in 0..self.rows {
                        v.push(self.data[r * self.cols + c]);
                    }
                }
                v
            }

            /// Wraps row-major entries directly; the length must be
            /// `rows * cols` exactly.
            pub fn from_row_major_vec(rows: usize, cols: usize, v: Vec<Complex64>) -> Result<Self> {
                if v.len() != rows * cols {
                    return Err(Error::invalid(format!(
                        "expected {} entries for a {}x{} grid, got {}",
                        rows * cols, rows, cols, v.len()
                    )));
                }
                Ok(Self { rows, cols, data: v })
            }

            /// Inverse of [`Self::to_col_major_vec`].
            pub fn from_col_major_vec(rows: usize, cols: usize, v: &[Complex64]) -> Result<Self> {
                if v.len() != rows * cols {
                    return Err(Error::invalid(format!(
                        "expected {} entries for a {}x{} grid, got {}",
                        rows * cols, rows, cols, v.len()
                    )));
                }
                let mut g = Self::zero(rows, cols);
                for c in 0..cols {
                    for r in 0..rows {
                        g.data[r * cols + c] = v[c * rows + r];
                    }
                }
                Ok(g)
            }

            /// Serializes the entries row-major as little-endian `f64`
            /// (re, im) pairs, 16 bytes per entry.
            pub fn to_le_bytes(&self) -> Vec<u8> {
                let mut out = Vec::with_capacity(self.data.len() * 16);
                for z in &self.data {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
                out
            }

            /// Parses the serialized form produced by [`Self::to_le_bytes`].
            /// The byte length must equal `rows * cols * 16` exactly.
            pub fn from_le_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<Self> {
                let expected = rows * cols * 16;
                if bytes.len() != expected {
                    return Err(Error::invalid(format!(
                        "expected {expected} bytes for a {rows}x{cols} grid, got {}",
                        bytes.len()
                    )));
                }
                let mut g = Self::zero(rows, cols);
                for (i, chunk) in bytes.chunks_exact(16).enumerate() {
                    let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
                    let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
                    g.data[i] = Complex64::new(re, im);
                }
                Ok(g)
            }
        }
    };
}

grid_type!(
    DDGrid,
    "Number of delay bins (the link's subcarrier count `m`).",
    "Number of Doppler bins (the link's symbol count `n`)."
);
grid_type!(
    TFGrid,
    "Number of subcarriers.",
    "Number of symbol slots."
);

/// Complex baseband samples at a fixed sample period.
///
/// Produced by the modulators (`n * (m + cp_len)` samples per frame) and
/// consumed by the channel and the demodulators.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<Complex64>,
    sample_period: f64,
}

impl TimeSignal {
    /// Wraps samples taken at `sample_period` seconds apart.
    pub fn new(samples: Vec<Complex64>, sample_period: f64) -> Self {
        assert!(sample_period > 0.0, "sample period must be positive");
        Self { samples, sample_period }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Mean squared magnitude, zero for an empty signal.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }
}

// ─────────────────────────────────────────────────────────────────────────
