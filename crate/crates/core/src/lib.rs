//! Spectral toolkit for the Zakharov system in first-order form
//! `(i∂t - Δ)u = Nu`, `(i∂t + αD)N = αD|u|²` on periodic boxes.

pub mod error;
pub mod evolve;
pub mod cli;
pub mod diagnostics;
pub mod dyadic;
pub mod grid;
pub mod illposed;
pub mod normal_form;
pub mod oracle;

pub use error::{Result, ZakError};
pub use grid::{Grid, SpectralField, ZakharovState};
pub use num_complex::Complex64;
