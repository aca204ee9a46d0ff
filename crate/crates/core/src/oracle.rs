//! Brute-force reference implementations. Every pair of lattice
//! frequencies is visited and the restriction weight is rebuilt from the
//! closed-form `χ_k`, `χ_{≤k}` formulas over a wide shell window, so
//! these routines share no code path with the fast operators beyond the
//! bump function itself. Cost is `O(n^{2d})`: use on tiny grids only.

use crate::dyadic::{chi, chi_le, DyadicConfig, Interaction};
use crate::error::Result;
use crate::grid::{SpectralField, MAX_DIM};
use num_complex::Complex64;

/// Shell window covering every lattice frequency of any grid used with the oracle.
const K_LO: i32 = -40;
const K_HI: i32 = 40;

/// Restriction weight `𝓟_kind(ζ, η)` for first-factor `|ζ|` and second-factor `|η|`.
pub fn pair_weight(kind: Interaction, cfg: &DyadicConfig, zeta: f64, eta: f64) -> f64 {
    let gap = cfg.gap() as i32;
    let lh = |lo: f64, hi: f64, pick: &dyn Fn(i32) -> bool| -> f64 {
        (K_LO..=K_HI)
            .filter(|&k| pick(k))
            .map(|k| chi_le(k - gap, lo) * chi(k, hi))
            .sum()
    };
    let all = |_: i32| true;
    let band = |k: i32| cfg.in_alpha_band(k);
    let off = |k: i32| !cfg.in_alpha_band(k);
    match kind {
        Interaction::LH => lh(zeta, eta, &all),
        Interaction::HL => lh(eta, zeta, &all),
        Interaction::AlphaL => lh(eta, zeta, &band),
        Interaction::XL => lh(eta, zeta, &off),
        Interaction::LAlpha => lh(zeta, eta, &band),
        Interaction::LX => lh(zeta, eta, &off),
        Interaction::HH => {
            let mut s = 0.0;
            for a in K_LO..=K_HI {
                let ca = chi(a, zeta);
                if ca == 0.0 {
                    continue;
                }
                for b in (a - gap + 1)..=(a + gap - 1) {
                    s += ca * chi(b, eta);
                }
            }
            if zeta == 0.0 && eta == 0.0 {
                s += 1.0;
            }
            s
        }
    }
}

fn all_pairs(
    f: &SpectralField,
    g: &SpectralField,
    cfg: &DyadicConfig,
    mut weight: impl FnMut(f64, f64, f64, f64, f64) -> f64,
) -> Result<SpectralField> {
    cfg.check_grid(f)?;
    cfg.check_grid(g)?;
    let grid = *cfg.grid();
    let d = grid.dim();
    let sq = grid.xi_sq();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for z in 0..grid.len() {
        let mz = grid.modes(z);
        for e in 0..grid.len() {
            let me = grid.modes(e);
            let mut m = [0i64; MAX_DIM];
            for a in 0..d {
                m[a] = mz[a] + me[a];
            }
            let Some(x) = grid.flat_of_modes(&m[..d]) else {
                continue;
            };
            let w = weight(sq[z].sqrt(), sq[e].sqrt(), sq[z], sq[e], sq[x]);
            if w != 0.0 {
                out[x] += f.coeffs()[z] * g.coeffs()[e] * w;
            }
        }
    }
    let v = 1.0 / grid.volume();
    out.iter_mut().for_each(|c| *c *= v);
    SpectralField::from_coeffs(grid, out)
}

/// `(fg)_kind` by direct summation.
pub fn paraproduct_direct(
    f: &SpectralField,
    g: &SpectralField,
    kind: Interaction,
    cfg: &DyadicConfig,
) -> Result<SpectralField> {
    all_pairs(f, g, cfg, |a, b, _, _, _| pair_weight(kind, cfg, a, b))
}

/// `Ω(f, g)` by direct summation.
pub fn omega_direct(f: &SpectralField, g: &SpectralField, cfg: &DyadicConfig) -> Result<SpectralField> {
    let alpha = cfg.alpha();
    all_pairs(f, g, cfg, |a, b, za, eb, xi| {
        let w = pair_weight(Interaction::XL, cfg, a, b);
        if w == 0.0 {
            0.0
        } else {
            w / (-xi + alpha * za.sqrt() + eb)
        }
    })
}

/// `Ω̃(f, g)` by direct summation (conjugating `g`).
pub fn omega_tilde_direct(
    f: &SpectralField,
    g: &SpectralField,
    cfg: &DyadicConfig,
) -> Result<SpectralField> {
    let alpha = cfg.alpha();
    let gbar = g.conj();
    all_pairs(f, &gbar, cfg, |a, b, za, eb, xi| {
        let w = pair_weight(Interaction::XL, cfg, a, b) + pair_weight(Interaction::LX, cfg, a, b);
        if w == 0.0 {
            0.0
        } else {
            w * alpha / (za - eb - alpha * xi.sqrt())
        }
    })
}
