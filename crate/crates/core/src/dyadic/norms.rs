use super::{chi_le, project_band, DyadicConfig};
use crate::error::{Result, ZakError};
use crate::grid::SpectralField;
use serde::{Deserialize, Serialize};

const ALLOWED_P: [f64; 8] = [4.0 / 3.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, f64::INFINITY];
const ALLOWED_Q: [f64; 3] = [1.0, 2.0, f64::INFINITY];

/// Regularity `s`, integrability `p`, summability `q` of a Besov norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64, homogeneous: bool) -> Result<Self> {
        if !s.is_finite() {
            return Err(ZakError::InvalidParameter(format!("regularity {s}")));
        }
        if !ALLOWED_P.iter().any(|a| (a - p).abs() < 1e-12 || (a.is_infinite() && p.is_infinite())) {
            return Err(ZakError::InvalidParameter(format!(
                "integrability p = {p} not in {{4/3, 3/2, 2, 3, 4, 6, 8, inf}}"
            )));
        }
        if !ALLOWED_Q.contains(&q) {
            return Err(ZakError::InvalidParameter(format!(
                "summability q = {q} not in {{1, 2, inf}}"
            )));
        }
        Ok(Self {
            s,
            p,
            q,
            homogeneous,
        })
    }
}

/// Physical `L^p` norm on the grid (Riemann sum; `p = ∞` is the sample max).
pub fn lp_norm(f: &SpectralField, p: f64) -> f64 {
    let g = f.grid();
    if p == 2.0 {
        return f.l2_norm();
    }
    let x = f.to_physical();
    if p.is_infinite() {
        return x.iter().map(|c| c.norm()).fold(0.0, f64::max);
    }
    let s: f64 = x.iter().map(|c| c.norm().powf(p)).sum();
    (s * g.cell()).powf(1.0 / p)
}

fn combine(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().copied().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Besov norm: `ℓ^q` over shells of `2^{ks}‖P_k f‖_p`. The inhomogeneous
/// version sums `k ≥ 1` plus `‖P_{≤0} f‖_p`; the homogeneous one sums every
/// representable shell and drops the zero mode.
pub fn besov_norm(f: &SpectralField, spec: &BesovSpec, cfg: &DyadicConfig) -> Result<f64> {
    cfg.check_grid(f)?;
    let mut terms = Vec::new();
    let first = if spec.homogeneous {
        cfg.k_min()
    } else {
        let w: Vec<f64> = cfg.table().xi_abs.iter().map(|&r| chi_le(0, r)).collect();
        terms.push(lp_norm(&f.scale_radial_table(&w), spec.p));
        cfg.k_min().max(1)
    };
    for k in first..=cfg.k_max() {
        let b = cfg.band_index(super::Band::Shell(k)).expect("in range");
        let piece = project_band(f, b, cfg);
        terms.push(2f64.powf(k as f64 * spec.s) * lp_norm(&piece, spec.p));
    }
    Ok(combine(&terms, spec.q))
}

/// `H^s` norm with weight `(1+|ξ|²)^{s/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let xi2 = f.grid().xi_sq();
    let e: f64 = f
        .coeffs()
        .iter()
        .zip(&xi2)
        .map(|(c, q)| (1.0 + q).powf(s) * c.norm_sqr())
        .sum();
    (e / f.grid().volume()).sqrt()
}

/// `Ḣ^s` norm with weight `|ξ|^s`, zero mode dropped.
pub fn homogeneous_sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let xi2 = f.grid().xi_sq();
    let e: f64 = f
        .coeffs()
        .iter()
        .zip(&xi2)
        .filter(|(_, q)| **q > 0.0)
        .map(|(c, q)| q.powf(s) * c.norm_sqr())
        .sum();
    (e / f.grid().volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_sobolev() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * x[0] + x[1]));
        for &s in &[0.0, 0.5, 1.0, -1.0] {
            let e = 6f64.powf(s / 2.0) * g.volume().sqrt();
            assert!((sobolev_norm(&f, s) - e).abs() < 1e-11 * e);
        }
        let z = SpectralField::zeros(g);
        assert_eq!(sobolev_norm(&z, 1.0), 0.0);
        let cfg = DyadicConfig::new(&g, 5, 1.0).unwrap();
        let spec = BesovSpec::new(0.5, 4.0, 2.0, false).unwrap();
        assert_eq!(besov_norm(&z, &spec, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(BesovSpec::new(0.0, 5.0, 2.0, false).is_err());
        assert!(BesovSpec::new(0.0, 4.0, 3.0, false).is_err());
        assert!(BesovSpec::new(0.0, 4.0 / 3.0, 1.0, false).is_ok());
        assert!(BesovSpec::new(0.0, f64::INFINITY, f64::INFINITY, true).is_ok());
    }

    #[test]
    fn lp_of_constant() {
        let g = Grid::new(1, 32, 3.0).unwrap();
        let f = SpectralField::from_real(g, &vec![2.0; 32]).unwrap();
        assert!((lp_norm(&f, 4.0) - 2.0 * 3f64.powf(0.25)).abs() < 1e-12);
        assert!((lp_norm(&f, f64::INFINITY) - 2.0).abs() < 1e-12);
    }
}
