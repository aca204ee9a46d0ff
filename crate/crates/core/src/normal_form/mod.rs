//! Normal-form bilinear multipliers and the change of unknowns built on them.
//!
//! `Ω(f,g)^(ξ) = L^{-d} Σ_η 𝓟_XL · f̂(ξ-η) ĝ(η) / (-|ξ|² + α|ξ-η| + |η|²)`
//! `Ω̃(f,g)^(ξ) = L^{-d} Σ_η 𝓟_{XL+LX} · α f̂(ξ-η) ĝ̄(η) / (|ξ-η|² - |η|² - α|ξ|)`
//!
//! With these symbols `v = u + Ω(N,u)` and `M = N + DΩ̃(u,u)` remove the
//! non-resonant quadratic interactions, so [`psi_forward`] adds the
//! correction and [`psi_inverse`] subtracts it inside a fixed-point loop.

pub mod probe;
pub mod radial_probe;

use crate::dyadic::{chi_le, DyadicConfig};
use crate::error::{Result, ZakError};
use crate::grid::{SpectralField, ZakharovState, MAX_DIM};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which resonance function sits in the denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResonanceKind {
    Schrod,
    Wave,
}

/// Resonance symbol with a denominator floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSymbol {
    pub kind: ResonanceKind,
    pub alpha: f64,
    pub floor: f64,
}

/// Default denominator floor `1e-6 · max(1, α²)`.
pub fn default_floor(alpha: f64) -> f64 {
    1e-6 * alpha.powi(2).max(1.0)
}

impl ResonanceSymbol {
    pub fn new(kind: ResonanceKind, alpha: f64) -> Self {
        Self {
            kind,
            alpha,
            floor: default_floor(alpha),
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// Denominator for first-factor frequency `ζ`, second `η`, output `ξ = ζ+η`.
    #[inline]
    pub fn denominator(&self, zeta_sq: f64, eta_sq: f64, xi_sq: f64) -> f64 {
        match self.kind {
            ResonanceKind::Schrod => -xi_sq + self.alpha * zeta_sq.sqrt() + eta_sq,
            ResonanceKind::Wave => zeta_sq - eta_sq - self.alpha * xi_sq.sqrt(),
        }
    }

    #[inline]
    pub fn numerator(&self) -> f64 {
        match self.kind {
            ResonanceKind::Schrod => 1.0,
            ResonanceKind::Wave => self.alpha,
        }
    }

    /// Symbol value, or `None` when the denominator is below the floor.
    pub fn eval(&self, zeta_sq: f64, eta_sq: f64, xi_sq: f64) -> Option<f64> {
        let den = self.denominator(zeta_sq, eta_sq, xi_sq);
        (den.abs() >= self.floor).then(|| self.numerator() / den)
    }
}

struct Point {
    modes: [i64; MAX_DIM],
    sq: f64,
    value: Complex64,
}

/// Non-zero lattice points of `f` weighted by `w`.
fn weighted_points(
    f: &SpectralField,
    cfg: &DyadicConfig,
    points: impl Iterator<Item = (usize, f64)>,
) -> Vec<Point> {
    let g = f.grid();
    let c = f.coeffs();
    let sq = &cfg.table().xi_sq;
    points
        .filter_map(|(i, w)| {
            let v = c[i] * w;
            (v != Complex64::new(0.0, 0.0)).then(|| Point {
                modes: g.modes(i),
                sq: sq[i],
                value: v,
            })
        })
        .collect()
}

/// Which slot carries the high frequency shell.
#[derive(Clone, Copy, PartialEq, Eq)]
enum HighSlot {
    First,
    Second,
}

/// Restricted symbol-weighted sum over the pairs
/// `χ_k(high) χ_{≤k-K}(low)` for shells `k` outside the α-band.
fn restricted_sum(
    first: &SpectralField,
    second: &SpectralField,
    slot: HighSlot,
    sym: &ResonanceSymbol,
    cfg: &DyadicConfig,
    out: &mut [Complex64],
) -> Result<()> {
    let grid = *cfg.grid();
    let d = grid.dim();
    let table = cfg.table();
    let (high_f, low_f) = match slot {
        HighSlot::First => (first, second),
        HighSlot::Second => (second, first),
    };
    let inv_vol = 1.0 / grid.volume();
    let gap = cfg.gap() as i32;
    for (b, band) in table.bands.iter().enumerate() {
        let crate::dyadic::Band::Shell(k) = *band else {
            continue;
        };
        if cfg.in_alpha_band(k) {
            continue;
        }
        let high = weighted_points(high_f, cfg, table.support[b].iter().copied());
        if high.is_empty() {
            continue;
        }
        let cut = k - gap;
        let low_iter = table
            .xi_abs
            .iter()
            .enumerate()
            .map(|(i, &r)| (i, chi_le(cut, r)))
            .filter(|(_, w)| *w != 0.0);
        let low = weighted_points(low_f, cfg, low_iter);
        for h in &high {
            for l in &low {
                let mut m = [0i64; MAX_DIM];
                for a in 0..d {
                    m[a] = h.modes[a] + l.modes[a];
                }
                let Some(xi) = grid.flat_of_modes(&m[..d]) else {
                    continue;
                };
                let (zeta_sq, eta_sq) = match slot {
                    HighSlot::First => (h.sq, l.sq),
                    HighSlot::Second => (l.sq, h.sq),
                };
                let xi_sq = table.xi_sq[xi];
                let den = sym.denominator(zeta_sq, eta_sq, xi_sq);
                if den.abs() < sym.floor {
                    let (first_k, second_k) = match slot {
                        HighSlot::First => (k, cut),
                        HighSlot::Second => (cut, k),
                    };
                    return Err(ZakError::Resonance {
                        value: den,
                        floor: sym.floor,
                        first: first_k,
                        second: second_k,
                    });
                }
                out[xi] += h.value * l.value * (sym.numerator() / den * inv_vol);
            }
        }
    }
    Ok(())
}

/// `Ω(f, g)` with the XL restriction (f high outside the α-band, g low).
pub fn omega(
    f: &SpectralField,
    g: &SpectralField,
    cfg: &DyadicConfig,
    floor: f64,
) -> Result<SpectralField> {
    cfg.check_grid(f)?;
    cfg.check_grid(g)?;
    let sym = ResonanceSymbol::new(ResonanceKind::Schrod, cfg.alpha()).with_floor(floor);
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.grid().len()];
    restricted_sum(f, g, HighSlot::First, &sym, cfg, &mut out)?;
    SpectralField::from_coeffs(*cfg.grid(), out)
}

/// `Ω̃(f, g)` with the XL+LX restriction; `g` enters conjugated.
pub fn omega_tilde(
    f: &SpectralField,
    g: &SpectralField,
    cfg: &DyadicConfig,
    floor: f64,
) -> Result<SpectralField> {
    cfg.check_grid(f)?;
    cfg.check_grid(g)?;
    let gbar = g.conj();
    let sym = ResonanceSymbol::new(ResonanceKind::Wave, cfg.alpha()).with_floor(floor);
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.grid().len()];
    restricted_sum(f, &gbar, HighSlot::First, &sym, cfg, &mut out)?;
    restricted_sum(f, &gbar, HighSlot::Second, &sym, cfg, &mut out)?;
    SpectralField::from_coeffs(*cfg.grid(), out)
}

/// `D Ω̃(f, g)`.
pub fn d_omega_tilde(
    f: &SpectralField,
    g: &SpectralField,
    cfg: &DyadicConfig,
    floor: f64,
) -> Result<SpectralField> {
    Ok(omega_tilde(f, g, cfg, floor)?.d())
}

/// `Ψ(u, N) = (u + Ω(N,u), N + DΩ̃(u,u))`.
pub fn psi_forward(
    state: &ZakharovState,
    cfg: &DyadicConfig,
    floor: f64,
) -> Result<(SpectralField, SpectralField)> {
    let cfg = align_alpha(cfg, state.alpha)?;
    let u = &state.u + &omega(&state.wave, &state.u, &cfg, floor)?;
    let n = &state.wave + &d_omega_tilde(&state.u, &state.u, &cfg, floor)?;
    Ok((u, n))
}

fn align_alpha(cfg: &DyadicConfig, alpha: f64) -> Result<DyadicConfig> {
    if cfg.alpha() == alpha {
        Ok(cfg.clone())
    } else {
        cfg.with_alpha(alpha)
    }
}

/// Fixed-point history of an iteration measured in `H^{1/2} × L²`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub iterations: usize,
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Largest ratio over iterates whose difference is well above roundoff.
    pub observed_ratio: f64,
}

impl ContractionReport {
    pub(crate) fn push(&mut self, diff: f64) {
        if let Some(&prev) = self.differences.last() {
            self.ratios.push(if prev > 0.0 { diff / prev } else { 0.0 });
        }
        self.differences.push(diff);
        self.iterations = self.differences.len();
    }

    /// Three consecutive ratios at or above one.
    pub(crate) fn stalled(&self) -> bool {
        self.ratios.len() >= 3 && self.ratios[self.ratios.len() - 3..].iter().all(|r| *r >= 1.0)
    }

    pub(crate) fn finish(&mut self) {
        let first = self.differences.first().copied().unwrap_or(0.0);
        let floor = 1e-11 * first;
        self.observed_ratio = self
            .ratios
            .iter()
            .zip(&self.differences)
            .filter(|(_, prev)| **prev > floor)
            .map(|(r, _)| *r)
            .fold(0.0, f64::max);
    }

    pub(crate) fn diverged(mut self) -> ZakError {
        self.finish();
        ZakError::Diverged {
            differences: self.differences,
            ratios: self.ratios,
        }
    }
}

/// `‖a‖_{H^{1/2}} + ‖b‖_{L²}`.
pub fn pair_norm(a: &SpectralField, b: &SpectralField) -> f64 {
    crate::dyadic::sobolev_norm(a, 0.5) + b.l2_norm()
}

/// Inverts `Ψ` by iterating `(u, N) ← (u' - Ω(N,u), N' - DΩ̃(u,u))` from zero.
pub fn psi_inverse(
    u_prime: &SpectralField,
    n_prime: &SpectralField,
    cfg: &DyadicConfig,
    floor: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(SpectralField, SpectralField, ContractionReport)> {
    cfg.check_grid(u_prime)?;
    cfg.check_grid(n_prime)?;
    let grid = *cfg.grid();
    let mut u = SpectralField::zeros(grid);
    let mut n = SpectralField::zeros(grid);
    let mut report = ContractionReport::default();
    for _ in 0..max_iter {
        let nu = u_prime - &omega(&n, &u, cfg, floor)?;
        let nn = n_prime - &d_omega_tilde(&u, &u, cfg, floor)?;
        let diff = pair_norm(&(&nu - &u), &(&nn - &n));
        u = nu;
        n = nn;
        if !diff.is_finite() {
            return Err(report.diverged());
        }
        report.push(diff);
        if diff <= tol {
            report.finish();
            return Ok((u, n, report));
        }
        if report.stalled() {
            return Err(report.diverged());
        }
    }
    Err(report.diverged())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{rel_err, Grid};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(g: Grid, seed: u64, scale: f64) -> SpectralField {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..g.len())
            .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * scale)
            .collect();
        SpectralField::from_coeffs(g, c).unwrap()
    }

    #[test]
    fn omega_matches_oracle_small_grid() {
        let g = Grid::new(1, 8, 5.0).unwrap();
        let cfg = DyadicConfig::nonconforming(&g, 2, 1.0).unwrap();
        for seed in 0..5 {
            let f = random_field(g, seed, 1.0);
            let h = random_field(g, seed + 100, 1.0);
            let a = omega(&f, &h, &cfg, default_floor(1.0)).unwrap();
            let b = oracle::omega_direct(&f, &h, &cfg).unwrap();
            assert!(rel_err(&a, &b) < 1e-12, "{}", rel_err(&a, &b));
            let a = omega_tilde(&f, &h, &cfg, default_floor(1.0)).unwrap();
            let b = oracle::omega_tilde_direct(&f, &h, &cfg).unwrap();
            assert!(rel_err(&a, &b) < 1e-12, "{}", rel_err(&a, &b));
        }
    }

    #[test]
    fn zero_and_scaling() {
        let g = Grid::new(2, 16, 5.0).unwrap();
        let cfg = DyadicConfig::nonconforming(&g, 2, 1.0).unwrap();
        let f = random_field(g, 1, 1.0);
        let h = random_field(g, 2, 1.0);
        let z = SpectralField::zeros(g);
        assert!(omega(&z, &h, &cfg, 1e-6).unwrap().is_zero());
        assert!(omega_tilde(&f, &z, &cfg, 1e-6).unwrap().is_zero());
        let c = Complex64::new(0.3, -1.2);
        let a = omega(&f.scale(c), &h, &cfg, 1e-6).unwrap();
        let b = omega(&f, &h, &cfg, 1e-6).unwrap().scale(c);
        assert!(rel_err(&a, &b) < 1e-13);
    }

    #[test]
    fn psi_zero_and_round_trip() {
        let g = Grid::new(2, 16, 5.0).unwrap();
        let cfg = DyadicConfig::nonconforming(&g, 2, 1.0).unwrap();
        let z = ZakharovState::zero(g, 1.0).unwrap();
        let (a, b) = psi_forward(&z, &cfg, 1e-6).unwrap();
        assert!(a.is_zero() && b.is_zero());
        let (u, n, rep) = psi_inverse(&a, &b, &cfg, 1e-6, 1e-12, 10).unwrap();
        assert!(u.is_zero() && n.is_zero());
        assert_eq!(rep.iterations, 1);

        let u0 = random_field(g, 7, 1.0);
        let n0 = random_field(g, 8, 1.0);
        let s = pair_norm(&u0, &n0);
        let st = ZakharovState::new(u0.scale_real(0.1 / s), n0.scale_real(0.1 / s), 0.0, 1.0).unwrap();
        let (a, b) = psi_forward(&st, &cfg, 1e-6).unwrap();
        let (u, n, rep) = psi_inverse(&a, &b, &cfg, 1e-6, 1e-13, 100).unwrap();
        assert!(pair_norm(&(&u - &st.u), &(&n - &st.wave)) < 1e-10);
        assert!(rep.observed_ratio < 1.0);
    }

    #[test]
    fn large_data_diverges() {
        let g = Grid::new(2, 16, 5.0).unwrap();
        let cfg = DyadicConfig::nonconforming(&g, 2, 1.0).unwrap();
        let u0 = random_field(g, 3, 1.0);
        let n0 = random_field(g, 4, 1.0);
        let s = pair_norm(&u0, &n0);
        let res = psi_inverse(&u0.scale_real(1e3 / s), &n0.scale_real(1e3 / s), &cfg, 1e-6, 1e-12, 50);
        match res {
            Err(ZakError::Diverged { ratios, .. }) => assert!(!ratios.is_empty()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
