use super::{Grid, SpectralField};
use crate::error::{Result, ZakError};
use num_complex::Complex64;

/// The pair `(u, N)` at time `t` for ion sound speed `alpha`.
///
/// `wave` is the reduced wave field `N = n₀ - i D^{-1} n₁ / α`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZakharovState {
    pub u: SpectralField,
    pub wave: SpectralField,
    pub t: f64,
    pub alpha: f64,
}

impl ZakharovState {
    pub fn new(u: SpectralField, wave: SpectralField, t: f64, alpha: f64) -> Result<Self> {
        u.same_grid(&wave)?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ZakError::InvalidAlpha(alpha));
        }
        Ok(Self { u, wave, t, alpha })
    }

    pub fn zero(grid: Grid, alpha: f64) -> Result<Self> {
        Self::new(SpectralField::zeros(grid), SpectralField::zeros(grid), 0.0, alpha)
    }

    /// Builds the state from physical `u`, density `n₀` and its time derivative `n₁`.
    ///
    /// `n₁` must have vanishing mean; the tolerance is relative to its sup norm.
    pub fn from_physical(
        grid: Grid,
        u: &[Complex64],
        n0: &[f64],
        n1: &[f64],
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ZakError::InvalidAlpha(alpha));
        }
        let uf = SpectralField::from_physical(grid, u)?;
        let a = SpectralField::from_real(grid, n0)?;
        let b = SpectralField::from_real(grid, n1)?;
        let mean = b.coeffs()[0].norm();
        let sup = n1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if mean > 1e-12 * grid.volume() * sup.max(f64::MIN_POSITIVE) {
            return Err(ZakError::NonzeroMeanVelocity(mean));
        }
        let mut wave = a;
        wave.axpy(Complex64::new(0.0, -1.0 / alpha), &b.d_inv());
        Self::new(uf, wave, 0.0, alpha)
    }

    /// Recovers `(n₀, n₁)` in physical space.
    pub fn densities(&self) -> (Vec<f64>, Vec<f64>) {
        let n0 = self.wave.real_part().to_physical();
        let n1 = self
            .wave
            .imag_part()
            .d()
            .scale_real(-self.alpha)
            .to_physical();
        (
            n0.iter().map(|c| c.re).collect(),
            n1.iter().map(|c| c.re).collect(),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// Largest physical modulus of either field, and whether all samples are finite.
    pub fn sup_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for f in [&self.u, &self.wave] {
            for c in f.to_physical() {
                let a = c.norm();
                if !a.is_finite() {
                    return f64::INFINITY;
                }
                m = m.max(a);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn densities_round_trip() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let pts: Vec<[f64; 4]> = (0..g.len()).map(|i| g.point(i)).collect();
        let u: Vec<Complex64> = pts.iter().map(|p| Complex64::new(p[0].sin(), 0.2)).collect();
        let n0: Vec<f64> = pts.iter().map(|p| 0.3 + p[1].cos()).collect();
        let n1: Vec<f64> = pts.iter().map(|p| (p[0] + 2.0 * p[1]).sin()).collect();
        let s = ZakharovState::from_physical(g, &u, &n0, &n1, 1.5).unwrap();
        let (a, b) = s.densities();
        for i in 0..g.len() {
            assert!((a[i] - n0[i]).abs() < 1e-12);
            assert!((b[i] - n1[i]).abs() < 1e-12);
        }
        let bad: Vec<f64> = n1.iter().map(|v| v + 0.1).collect();
        assert!(matches!(
            ZakharovState::from_physical(g, &u, &n0, &bad, 1.5),
            Err(ZakError::NonzeroMeanVelocity(_))
        ));
    }
}
