//! Littlewood-Paley machinery: the bump `η₀`, shell projections, Besov
//! norms and paraproducts with a frequency gap.

mod norms;
mod paraproduct;

pub use norms::{besov_norm, homogeneous_sobolev_norm, lp_norm, sobolev_norm, BesovSpec};
pub use paraproduct::{paraproduct, paraproduct_sum, paraproduct_sums, BandPieces, Interaction};

use crate::error::{Result, ZakError};
use crate::grid::{Grid, SpectralField};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Inner edge of the transition region of `η₀`.
pub const ETA_INNER: f64 = 0.8;
/// Outer edge: `η₀` vanishes from here on.
pub const ETA_OUTER: f64 = 1.6;

static OUT_OF_RANGE: AtomicU64 = AtomicU64::new(0);

/// Number of projections requested onto shells that do not meet the lattice.
pub fn out_of_range_projections() -> u64 {
    OUT_OF_RANGE.load(Ordering::Relaxed)
}

fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth monotone step on `[0,1]`: 0 below, 1 above.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = glue(t);
        a / (a + glue(1.0 - t))
    }
}

/// Radial bump: 1 on `|ξ| ≤ 4/5`, 0 on `|ξ| ≥ 8/5`.
pub fn eta0(r: f64) -> f64 {
    if r <= ETA_INNER {
        1.0
    } else if r >= ETA_OUTER {
        0.0
    } else {
        1.0 - smooth_step((r - ETA_INNER) / (ETA_OUTER - ETA_INNER))
    }
}

/// `η₀` of a frequency vector.
pub fn eta0_vec(xi: &[f64]) -> f64 {
    eta0(xi.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Shell multiplier `χ_k(r) = η₀(r/2^k) - η₀(r/2^{k-1})`.
pub fn chi(k: i32, r: f64) -> f64 {
    eta0(r / 2f64.powi(k)) - eta0(r / 2f64.powi(k - 1))
}

/// Low-pass multiplier `χ_{≤k}(r) = η₀(r/2^k)`.
pub fn chi_le(k: i32, r: f64) -> f64 {
    eta0(r / 2f64.powi(k))
}

/// A dyadic frequency band: the head `P_{≤k_min-1}` or a shell `P_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    Head,
    Shell(i32),
}

/// Sparse per-band weights on a grid.
#[derive(Debug)]
pub struct BandTable {
    pub bands: Vec<Band>,
    /// `(flat index, weight)` for every lattice point where the band weight is nonzero.
    pub support: Vec<Vec<(usize, f64)>>,
    pub xi_abs: Vec<f64>,
    pub xi_sq: Vec<f64>,
}

/// Frequency gap, α-band location and representable shell range on a grid.
#[derive(Clone, Debug)]
pub struct DyadicConfig {
    grid: Grid,
    gap: u32,
    alpha: f64,
    k_min: i32,
    k_max: i32,
    permissive: bool,
    table: Arc<BandTable>,
}

impl DyadicConfig {
    /// Standard configuration; requires `K ≥ 5`.
    pub fn new(grid: &Grid, gap: u32, alpha: f64) -> Result<Self> {
        if gap < 5 {
            return Err(ZakError::GapTooSmall(gap));
        }
        Self::build(grid, gap, alpha, false)
    }

    /// Allows `K ≥ 2` for tiny grids; the result is flagged nonconforming.
    pub fn nonconforming(grid: &Grid, gap: u32, alpha: f64) -> Result<Self> {
        if gap < 2 {
            return Err(ZakError::InvalidParameter(format!(
                "frequency gap must be at least 2, got {gap}"
            )));
        }
        Self::build(grid, gap, alpha, true)
    }

    fn build(grid: &Grid, gap: u32, alpha: f64, permissive: bool) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ZakError::InvalidAlpha(alpha));
        }
        let (k_min, k_max) = shell_range(grid);
        let xi_sq = grid.xi_sq();
        let xi_abs: Vec<f64> = xi_sq.iter().map(|q| q.sqrt()).collect();
        let mut bands = vec![Band::Head];
        let mut support = vec![vec![(0usize, 1.0)]];
        for k in k_min..=k_max {
            bands.push(Band::Shell(k));
            let s: Vec<(usize, f64)> = xi_abs
                .iter()
                .enumerate()
                .filter_map(|(i, &r)| {
                    let w = chi(k, r);
                    (w != 0.0).then_some((i, w))
                })
                .collect();
            support.push(s);
        }
        Ok(Self {
            grid: *grid,
            gap,
            alpha,
            k_min,
            k_max,
            permissive,
            table: Arc::new(BandTable {
                bands,
                support,
                xi_abs,
                xi_sq,
            }),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gap(&self) -> u32 {
        self.gap
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    /// True when the gap is below the standard `K ≥ 5`.
    pub fn is_nonconforming(&self) -> bool {
        self.gap < 5
    }

    pub fn table(&self) -> &BandTable {
        &self.table
    }

    /// Same grid and gap with another α.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ZakError::InvalidAlpha(alpha));
        }
        let mut c = self.clone();
        c.alpha = alpha;
        Ok(c)
    }

    /// Same grid and α with another gap (keeps the nonconforming permission).
    pub fn with_gap(&self, gap: u32) -> Result<Self> {
        if gap < 2 || (gap < 5 && !self.permissive) {
            return Err(ZakError::GapTooSmall(gap));
        }
        let mut c = self.clone();
        c.gap = gap;
        Ok(c)
    }

    /// Whether shell `k` lies in the α-band `|k - log₂α| ≤ 1`.
    pub fn in_alpha_band(&self, k: i32) -> bool {
        (k as f64 - self.alpha.log2()).abs() <= 1.0
    }

    /// Index of a band in the table.
    pub fn band_index(&self, b: Band) -> Option<usize> {
        match b {
            Band::Head => Some(0),
            Band::Shell(k) if k >= self.k_min && k <= self.k_max => {
                Some((k - self.k_min) as usize + 1)
            }
            _ => None,
        }
    }

    pub(crate) fn check_grid(&self, f: &SpectralField) -> Result<()> {
        if *f.grid() == self.grid {
            Ok(())
        } else {
            Err(ZakError::GridMismatch)
        }
    }
}

/// Representable shells: `P_{≤k_min-1}` keeps only the zero mode and
/// `P_{≤k_max}` is the identity on the lattice.
pub fn shell_range(grid: &Grid) -> (i32, i32) {
    let xa = grid.xi_abs();
    let lo = xa.iter().copied().filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);
    let mut k_min = (lo / ETA_INNER).log2().floor() as i32;
    while ETA_INNER * 2f64.powi(k_min) > lo {
        k_min -= 1;
    }
    while ETA_INNER * 2f64.powi(k_min + 1) <= lo {
        k_min += 1;
    }
    let hi = xa.iter().copied().fold(0.0, f64::max);
    let mut k_max = (hi / ETA_INNER).log2().ceil() as i32;
    while ETA_INNER * 2f64.powi(k_max - 1) >= hi {
        k_max -= 1;
    }
    while ETA_INNER * 2f64.powi(k_max) < hi {
        k_max += 1;
    }
    (k_min, k_max.max(k_min))
}

/// `P_k f`; shells outside the representable range give zero and bump a counter.
pub fn project(f: &SpectralField, k: i32, cfg: &DyadicConfig) -> Result<SpectralField> {
    cfg.check_grid(f)?;
    match cfg.band_index(Band::Shell(k)) {
        Some(b) => Ok(project_band(f, b, cfg)),
        None => {
            OUT_OF_RANGE.fetch_add(1, Ordering::Relaxed);
            Ok(SpectralField::zeros(*f.grid()))
        }
    }
}

/// `P_{≤k} f`, from the closed-form low-pass multiplier.
pub fn project_le(f: &SpectralField, k: i32, cfg: &DyadicConfig) -> Result<SpectralField> {
    cfg.check_grid(f)?;
    let w: Vec<f64> = cfg.table.xi_abs.iter().map(|&r| chi_le(k, r)).collect();
    Ok(f.scale_radial_table(&w))
}

/// `P_{≤k_min-1} f`: the zero mode.
pub fn project_head(f: &SpectralField, cfg: &DyadicConfig) -> Result<SpectralField> {
    cfg.check_grid(f)?;
    Ok(project_band(f, 0, cfg))
}

pub(crate) fn project_band(f: &SpectralField, b: usize, cfg: &DyadicConfig) -> SpectralField {
    let mut out = SpectralField::zeros(*f.grid());
    let c = f.coeffs();
    let o = out.coeffs_mut();
    for &(i, w) in &cfg.table.support[b] {
        o[i] = c[i] * w;
    }
    out
}
