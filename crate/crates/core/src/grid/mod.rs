//! Periodic grids, Fourier coefficient fields and the free propagators.
//!
//! Convention: the forward transform is the Riemann sum
//! `f̂(ξ) = (L/n)^d Σ_x f(x) e^{-ix·ξ}` and the inverse is
//! `f(x) = L^{-d} Σ_ξ f̂(ξ) e^{ix·ξ}`, so that `∫|f|² = L^{-d} Σ |f̂|²`
//! holds exactly on the grid.

mod checkpoint;
mod fft;
mod field;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use field::{rel_err, SpectralField};
pub(crate) use field::Padder;
pub use state::ZakharovState;

pub(crate) use fft::{fft_nd, fft_nd_pruned};

use crate::error::{Result, ZakError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Periodic box `[0, L)^d` sampled with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(ZakError::UnsupportedDimension(dim));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(ZakError::InvalidPointCount(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(ZakError::InvalidLength(length));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of lattice points `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Lattice spacing `2π/L` in frequency.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// `L^d`, the volume of the box.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Riemann-sum cell weight `(L/n)^d`.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Signed mode number of storage index `i` along one axis.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        let h = self.n / 2;
        if i < h {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Storage index of signed mode `m`, if representable.
    #[inline]
    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if m < -h || m >= h {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.n as i64) as usize)
        }
    }

    /// Signed modes of a flat (row-major, last axis fastest) index.
    pub fn modes(&self, flat: usize) -> [i64; MAX_DIM] {
        let mut out = [0i64; MAX_DIM];
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = self.mode(rest % self.n);
            rest /= self.n;
        }
        out
    }

    /// Flat index of a mode vector, if every component is representable.
    pub fn flat_of_modes(&self, m: &[i64]) -> Option<usize> {
        let mut flat = 0usize;
        for &c in m.iter().take(self.dim) {
            flat = flat * self.n + self.index_of_mode(c)?;
        }
        Some(flat)
    }

    /// Wave vector of a flat index (unused components are zero).
    pub fn xi(&self, flat: usize) -> [f64; MAX_DIM] {
        let m = self.modes(flat);
        let dk = self.dk();
        let mut out = [0.0; MAX_DIM];
        for a in 0..self.dim {
            out[a] = dk * m[a] as f64;
        }
        out
    }

    /// `|ξ|²` at every lattice point, computed from exact integer mode sums.
    pub fn xi_sq(&self) -> Vec<f64> {
        let dk2 = self.dk() * self.dk();
        (0..self.len())
            .map(|f| {
                let m = self.modes(f);
                let s: i64 = m.iter().map(|c| c * c).sum();
                dk2 * s as f64
            })
            .collect()
    }

    /// `|ξ|` at every lattice point.
    pub fn xi_abs(&self) -> Vec<f64> {
        self.xi_sq().into_iter().map(f64::sqrt).collect()
    }

    /// Smallest nonzero `|ξ|` on the lattice.
    pub fn xi_min(&self) -> f64 {
        self.dk()
    }

    /// Largest `|ξ|` on the lattice (the all-Nyquist corner).
    pub fn xi_max(&self) -> f64 {
        self.dk() * (self.n / 2) as f64 * (self.dim as f64).sqrt()
    }

    /// Flat index of `-m` taken modulo `n` on every axis.
    pub fn neg_index(&self, flat: usize) -> usize {
        let mut out = 0usize;
        let mut stride = 1usize;
        let mut rest = flat;
        for _ in 0..self.dim {
            let i = rest % self.n;
            rest /= self.n;
            let j = (self.n - i) % self.n;
            out += j * stride;
            stride *= self.n;
        }
        out
    }

    /// Physical coordinates of a flat sample index.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let h = self.spacing();
        let mut out = [0.0; MAX_DIM];
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = h * (rest % self.n) as f64;
            rest /= self.n;
        }
        out
    }

    /// The same box with twice the points per axis.
    pub fn padded(&self) -> Grid {
        Grid {
            dim: self.dim,
            n: 2 * self.n,
            length: self.length,
        }
    }

    /// For every base flat index, the flat index of the same mode on `padded()`.
    pub fn embedding(&self) -> Vec<usize> {
        let p = self.padded();
        (0..self.len())
            .map(|f| {
                let m = self.modes(f);
                p.flat_of_modes(&m[..self.dim]).expect("base mode fits padded grid")
            })
            .collect()
    }
}
