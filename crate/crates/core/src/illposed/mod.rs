//! A radial datum `u = v + iw` on `R^4` built from dyadic rescalings of one ring
//! profile, for which `(uū)_{HL} - (uū)_{LH}` has divergent `H²` partial sums.
//!
//! Everything here is one-dimensional radial quadrature: after rescaling
//! `x ↦ 2^{-j}x`, the `j`-th term of the decoupled norm is
//! `‖φ(y) Σ_k c_{jk} φ(2^{k-j}y)‖_{L²(R^4)}`.

pub mod bessel;
pub mod radial;

use crate::error::{Result, ZakError};
use crate::grid::{Grid, SpectralField};
use num_complex::Complex64;
use radial::{abs_moment, default_quadrature, RadialJet, RadialQuadrature, Ring, SPHERE_AREA_4D};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use bessel::{bessel_j0, bessel_j012, bessel_j1};
pub use radial::{ring_profile, RadialProfile};

/// Admissible open interval for `θ`.
pub const THETA_RANGE: (f64, f64) = (0.5, 0.75);

/// Which coefficient sequences feed `v` and `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientPattern {
    /// `a` on even `j`, `b` on odd `j`.
    Parity,
    /// `b ≡ 0`: real-valued `u`.
    RealOnly,
    /// `a = b` on every `j`.
    Overlapping,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LacunarySpec {
    pub theta: f64,
    pub start: u32,
    pub gap: u32,
    pub n_max: u32,
    pub alpha: f64,
    pub pattern: CoefficientPattern,
    /// Set when `θ` lies outside the admissible interval.
    pub hypothesis_violated: bool,
}

impl Default for LacunarySpec {
    fn default() -> Self {
        Self {
            theta: 0.6,
            start: 4,
            gap: 5,
            n_max: 40,
            alpha: 1.0,
            pattern: CoefficientPattern::Parity,
            hypothesis_violated: false,
        }
    }
}

impl LacunarySpec {
    pub fn new(theta: f64, start: u32, gap: u32, n_max: u32, alpha: f64) -> Result<Self> {
        let spec = Self {
            theta,
            start,
            gap,
            n_max,
            alpha,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same checks except the `θ` interval, which is recorded instead.
    pub fn exploratory(theta: f64, start: u32, gap: u32, n_max: u32, alpha: f64) -> Result<Self> {
        let mut spec = Self {
            theta,
            start,
            gap,
            n_max,
            alpha,
            hypothesis_violated: !theta_admissible(theta),
            ..Self::default()
        };
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(ZakError::InvalidParameter(format!("theta={theta} must be positive")));
        }
        let saved = spec.hypothesis_violated;
        spec.hypothesis_violated = true;
        spec.validate()?;
        spec.hypothesis_violated = saved;
        Ok(spec)
    }

    pub fn with_pattern(mut self, pattern: CoefficientPattern) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !self.hypothesis_violated && !theta_admissible(self.theta) {
            errs.push(format!(
                "illposed.theta={} must lie in the open interval (1/2, 3/4)",
                self.theta
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            errs.push(format!("illposed.alpha={} must be positive", self.alpha));
        } else {
            let need = self.alpha.log2().ceil() as i64 + 2;
            if (self.start as i64) < need {
                errs.push(format!(
                    "illposed.J={} must satisfy J >= ceil(log2(alpha)) + 2 = {need}",
                    self.start
                ));
            }
        }
        if self.gap == 0 {
            errs.push("illposed.K must be at least 1".into());
        }
        if self.n_max > 200 {
            errs.push(format!("illposed.n_max={} exceeds 200", self.n_max));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ZakError::Config(errs))
        }
    }

    /// Coefficient of `φ_j` in `v`.
    pub fn a(&self, j: u32) -> f64 {
        if j <= self.start {
            return 0.0;
        }
        let x = (j as f64).powf(-self.theta);
        match self.pattern {
            CoefficientPattern::Parity | CoefficientPattern::RealOnly if j % 2 == 0 => x,
            CoefficientPattern::Overlapping => x,
            _ => 0.0,
        }
    }

    /// Coefficient of `φ_j` in `w`.
    pub fn b(&self, j: u32) -> f64 {
        if j <= self.start {
            return 0.0;
        }
        let x = (j as f64).powf(-self.theta);
        match self.pattern {
            CoefficientPattern::Parity if j % 2 == 1 => x,
            CoefficientPattern::Overlapping => x,
            _ => 0.0,
        }
    }

    /// First index with a nonempty inner sum.
    pub fn first_term(&self) -> u32 {
        self.start + self.gap + 1
    }
}

fn theta_admissible(theta: f64) -> bool {
    theta > THETA_RANGE.0 && theta < THETA_RANGE.1
}

/// `C_n = (Σ_{J+K<j≤n} j^{-2θ}(j-K)^{2(1-θ)})^{1/2}`.
pub fn comparator(spec: &LacunarySpec, n: u32) -> f64 {
    let t = spec.theta;
    let k = spec.gap as f64;
    (spec.first_term()..=n)
        .map(|j| {
            let j = j as f64;
            j.powf(-2.0 * t) * (j - k).powf(2.0 * (1.0 - t))
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub n: u32,
    pub s_n: f64,
    pub c_n: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AntisymSeries {
    pub spec: LacunarySpec,
    pub rows: Vec<SeriesRow>,
    /// Squared contribution of each `j`, starting at `J+K+1`.
    pub terms: Vec<f64>,
    /// `max_j |‖(4^{-j} - Δ)G_j‖² / ‖G_j‖² - 1|`: how far `2^{4j}` is from the
    /// exact `⟨ξ⟩^4` weight on the rescaled term `G_j`.
    pub cross_term_bound: f64,
}

/// Jets of `φ(2^{-m} y)` on the nodes, for every offset `m`.
struct ScaledRing {
    base: Vec<RadialJet>,
    scaled: Vec<Vec<RadialJet>>,
    first_offset: u32,
}

impl ScaledRing {
    fn new(ring: &Ring, quad: &RadialQuadrature, offsets: std::ops::RangeInclusive<u32>) -> Self {
        let base = quad.nodes.par_iter().map(|&r| ring.jet(r)).collect();
        let first_offset = *offsets.start();
        let scaled = offsets
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&m| {
                let s = (-(m as f64)).exp2();
                quad.nodes.iter().map(|&r| ring.jet(s * r)).collect()
            })
            .collect();
        Self {
            base,
            scaled,
            first_offset,
        }
    }

    fn at(&self, m: u32) -> &[RadialJet] {
        &self.scaled[(m - self.first_offset) as usize]
    }
}

/// The decoupled partial sums `S_n` on the default ring and quadrature.
pub fn antisym_partial_norms(spec: &LacunarySpec) -> Result<AntisymSeries> {
    antisym_partial_norms_with(spec, &Ring::default(), &default_quadrature())
}

pub fn antisym_partial_norms_with(
    spec: &LacunarySpec,
    ring: &Ring,
    quad: &RadialQuadrature,
) -> Result<AntisymSeries> {
    spec.validate()?;
    let first = spec.first_term();
    if spec.n_max < first {
        return Ok(AntisymSeries {
            spec: *spec,
            rows: Vec::new(),
            terms: Vec::new(),
            cross_term_bound: 0.0,
        });
    }
    let max_offset = spec.n_max - spec.start - 1;
    let jets = ScaledRing::new(ring, quad, spec.gap..=max_offset.max(spec.gap));
    let js: Vec<u32> = (first..=spec.n_max).collect();
    let per_j: Vec<(f64, f64)> = js
        .par_iter()
        .map(|&j| term_for(spec, &jets, quad, j))
        .collect();
    let mut rows = Vec::with_capacity(js.len());
    let mut terms = Vec::with_capacity(js.len());
    let mut acc = 0.0;
    let mut cross: f64 = 0.0;
    for (&j, &(term, dev)) in js.iter().zip(&per_j) {
        acc += term;
        terms.push(term);
        cross = cross.max(dev);
        let s_n = acc.sqrt();
        let c_n = comparator(spec, j);
        rows.push(SeriesRow {
            n: j,
            s_n,
            c_n,
            ratio: if c_n > 0.0 { s_n / c_n } else { 0.0 },
        });
    }
    Ok(AntisymSeries {
        spec: *spec,
        rows,
        terms,
        cross_term_bound: cross,
    })
}

/// `(‖G_j‖², |‖(4^{-j}-Δ)G_j‖²/‖G_j‖² - 1|)` with `G_j = φ · Σ_k c_{jk} φ(2^{k-j}·)`.
fn term_for(spec: &LacunarySpec, jets: &ScaledRing, quad: &RadialQuadrature, j: u32) -> (f64, f64) {
    let coeffs: Vec<(u32, f64)> = ((spec.start + 1)..=(j - spec.gap))
        .map(|k| (j - k, spec.a(j) * spec.b(k) - spec.a(k) * spec.b(j)))
        .filter(|(_, c)| *c != 0.0)
        .collect();
    if coeffs.is_empty() {
        return (0.0, 0.0);
    }
    let lift = (-2.0 * j as f64).exp2();
    let mut g2 = 0.0;
    let mut lg2 = 0.0;
    for (i, &r) in quad.nodes.iter().enumerate() {
        let mut h = RadialJet::default();
        for &(m, c) in &coeffs {
            let s = (-(m as f64)).exp2();
            let p = jets.at(m)[i];
            h.value += c * p.value;
            h.d1 += c * s * p.d1;
            h.d2 += c * s * s * p.d2;
        }
        let f = jets.base[i];
        let g = f.value * h.value;
        let lap = f.laplacian(r) * h.value + 2.0 * f.d1 * h.d1 + f.value * h.laplacian(r);
        let w = quad.weights[i];
        g2 += g * g * w;
        let l = lift * g - lap;
        lg2 += l * l * w;
    }
    let g2 = SPHERE_AREA_4D * g2;
    let lg2 = SPHERE_AREA_4D * lg2;
    (g2, if g2 > 0.0 { (lg2 / g2 - 1.0).abs() } else { 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IllposedVerdict {
    /// `S_n` increases, stays within a factor 4 of `C_n`, and `C_n` diverges.
    pub diverging: bool,
    pub strictly_increasing: bool,
    /// Measured slope of `log term_j` against `log j` over the upper half of the
    /// range. At `n ≤ 40` this is still far from its limit `2 - 4θ`.
    pub tail_exponent: f64,
    /// `2 - 4θ`, the exponent of the summand of `C_n²`; `C_n → ∞` iff it is `≥ -1`.
    pub comparator_exponent: f64,
    /// Least-squares fit `S_n ≈ c C_n - offset`.
    pub fitted_c: f64,
    pub fitted_offset: f64,
    pub ratio_band: (f64, f64),
    pub cross_term_bound: f64,
    /// Largest relative change of `S_n` when the radial panels are doubled.
    pub self_convergence: f64,
    pub hypothesis_violated: bool,
}

/// Series on the default rule plus its refinement, with the divergence verdict.
pub fn run_illposed(spec: &LacunarySpec) -> Result<(AntisymSeries, IllposedVerdict)> {
    let ring = Ring::default();
    let quad = default_quadrature();
    let series = antisym_partial_norms_with(spec, &ring, &quad)?;
    let fine = antisym_partial_norms_with(spec, &ring, &quad.refined())?;
    let self_convergence = series
        .rows
        .iter()
        .zip(&fine.rows)
        .map(|(a, b)| {
            if b.s_n > 0.0 {
                (a.s_n - b.s_n).abs() / b.s_n
            } else {
                (a.s_n - b.s_n).abs()
            }
        })
        .fold(0.0, f64::max);
    if self_convergence > 1e-6 {
        return Err(ZakError::Quadrature(format!(
            "partial norms moved by {self_convergence:e} under panel doubling"
        )));
    }
    let verdict = verdict(&series, self_convergence);
    Ok((series, verdict))
}

pub fn verdict(series: &AntisymSeries, self_convergence: f64) -> IllposedVerdict {
    let rows = &series.rows;
    let strictly_increasing = rows.len() >= 2 && rows.windows(2).all(|w| w[1].s_n > w[0].s_n);
    let first = series.spec.first_term();
    let pts: Vec<(f64, f64)> = series
        .terms
        .iter()
        .enumerate()
        .skip(series.terms.len() / 2)
        .filter(|(_, t)| **t > 0.0)
        .map(|(i, t)| (((first + i as u32) as f64).ln(), t.ln()))
        .collect();
    let tail_exponent = fit_line(&pts).map(|(s, _)| s).unwrap_or(f64::NEG_INFINITY);
    let band_rows: Vec<&SeriesRow> = rows.iter().filter(|r| r.n >= first + 4).collect();
    let fit: Vec<(f64, f64)> = band_rows.iter().map(|r| (r.c_n, r.s_n)).collect();
    let (fitted_c, intercept) = fit_line(&fit).unwrap_or((0.0, 0.0));
    let lo = band_rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = band_rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let comparator_exponent = 2.0 - 4.0 * series.spec.theta;
    let tracking = !band_rows.is_empty() && lo > 0.0 && hi <= 4.0 * lo;
    IllposedVerdict {
        diverging: strictly_increasing && tracking && comparator_exponent >= -1.0,
        strictly_increasing,
        tail_exponent,
        comparator_exponent,
        fitted_c,
        fitted_offset: -intercept,
        ratio_band: if band_rows.is_empty() { (0.0, 0.0) } else { (lo, hi) },
        cross_term_bound: series.cross_term_bound,
        self_convergence,
        hypothesis_violated: series.spec.hypothesis_violated,
    }
}

/// Ordinary least squares `y ≈ slope x + intercept`.
fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub n: u32,
    pub h2: f64,
    pub w21: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct U0NormReport {
    /// Exact `‖u_n‖_{H²}` (the `φ_j` have disjoint Fourier supports) and the
    /// triangle-inequality bound for `‖u_n‖_{W^{2,1}}`, for each truncation `n`.
    pub rows: Vec<NormRow>,
    /// `(‖u_{n_max}‖ - ‖u_{30}‖) / ‖u_{n_max}‖` for both norms (zero when `n_max ≤ 30`).
    pub h2_tail_after_30: f64,
    pub w21_tail_after_30: f64,
    pub self_convergence: f64,
}

/// `(‖φ‖_1, ‖∇φ‖_1, ‖∇²φ‖_1)` with the nuclear norm `|φ''| + 3|φ'/r|` on the
/// Hessian; `step` and `order` set the resolution.
pub fn ring_l1_moments(ring: &Ring, r_max: f64, step: f64, order: usize) -> [f64; 3] {
    let m0 = abs_moment(|r| ring.value(r), r_max, step, order);
    let m1 = abs_moment(|r| ring.jet(r).d1, r_max, step, order);
    let m2 = abs_moment(|r| ring.jet(r).d2, r_max, step, order);
    let m3 = abs_moment(
        |r| {
            let j = ring.jet(r);
            if r == 0.0 {
                j.d2
            } else {
                j.d1 / r
            }
        },
        r_max,
        step,
        order,
    );
    [m0, m1, m2 + 3.0 * m3].map(|x| SPHERE_AREA_4D * x)
}

pub fn u0_norm_report(spec: &LacunarySpec) -> Result<U0NormReport> {
    spec.validate()?;
    let ring = Ring::default();
    let r_max = default_quadrature().r_max;
    let moments = ring_l1_moments(&ring, r_max, 0.5, 16);
    let fine = ring_l1_moments(&ring, r_max, 0.25, 16);
    let self_convergence = moments
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    if self_convergence > 1e-6 {
        return Err(ZakError::Quadrature(format!(
            "W^(2,1) moments moved by {self_convergence:e} under panel doubling"
        )));
    }
    let c = SPHERE_AREA_4D / (2.0 * PI).powi(4);
    let mut rows = Vec::new();
    let (mut h2, mut w21) = (0.0, 0.0);
    for j in (spec.start + 1)..=spec.n_max {
        let cj = spec.a(j).hypot(spec.b(j));
        let lift = (-2.0 * j as f64).exp2();
        let hj = c * ring.fourier_moment(|s| (lift + s * s).powi(2) * s.powi(3));
        h2 += cj * cj * hj;
        let jf = j as f64;
        w21 += cj
            * ((-4.0 * jf).exp2() * moments[0]
                + (-3.0 * jf).exp2() * moments[1]
                + (-2.0 * jf).exp2() * moments[2]);
        rows.push(NormRow {
            n: j,
            h2: h2.sqrt(),
            w21,
        });
    }
    let tail = |f: fn(&NormRow) -> f64| -> f64 {
        let last = rows.last().map(f).unwrap_or(0.0);
        match rows.iter().find(|r| r.n == 30) {
            Some(r) if last > 0.0 && spec.n_max > 30 => (last - f(r)) / last,
            _ => 0.0,
        }
    };
    Ok(U0NormReport {
        h2_tail_after_30: tail(|r| r.h2),
        w21_tail_after_30: tail(|r| r.w21),
        rows,
        self_convergence,
    })
}

/// `u_0` sampled on a periodic grid, with the shells the grid cannot resolve dropped.
#[derive(Clone, Debug)]
pub struct LacunaryField {
    pub field: SpectralField,
    /// Largest `j` kept: `⌊log2(nπ/L)⌋ - 1`.
    pub used_max: u32,
    pub truncated: bool,
}

/// Periodization of `Σ_j (a_j + i b_j) φ(2^j x)`: the coefficient at `ξ` is
/// `Σ_j (a_j + i b_j) 2^{-dj} φ̂(|ξ|/2^j)`.
pub fn build_u0(spec: &LacunarySpec, grid: &Grid) -> Result<LacunaryField> {
    spec.validate()?;
    let ring = Ring::default();
    let nyq = grid.n() as f64 * PI / grid.length();
    let used_max = (nyq.log2().floor() as i64 - 1).max(-1);
    if spec.n_max <= spec.start {
        return Ok(LacunaryField {
            field: SpectralField::zeros(*grid),
            used_max: used_max.max(0) as u32,
            truncated: false,
        });
    }
    if used_max <= spec.start as i64 {
        return Err(ZakError::InvalidParameter(format!(
            "grid (n={}, L={}) resolves shells up to j={used_max}, none above J={}",
            grid.n(),
            grid.length(),
            spec.start
        )));
    }
    let used_max = used_max as u32;
    let top = spec.n_max.min(used_max);
    let d = grid.dim() as f64;
    let xi = grid.xi_abs();
    let coeffs = xi
        .iter()
        .map(|&r| {
            let mut c = Complex64::new(0.0, 0.0);
            for j in (spec.start + 1)..=top {
                let s = (j as f64).exp2();
                let b = ring.fourier(r / s);
                if b != 0.0 {
                    c += Complex64::new(spec.a(j), spec.b(j)) * (b * s.powf(-d));
                }
            }
            c
        })
        .collect();
    Ok(LacunaryField {
        field: SpectralField::from_coeffs(*grid, coeffs)?,
        used_max,
        truncated: spec.n_max > used_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation_lists_every_violation() {
        let err = LacunarySpec::new(0.8, 0, 0, 40, 8.0).unwrap_err();
        let ZakError::Config(list) = err else {
            panic!("expected config error")
        };
        assert_eq!(list.len(), 3);
        assert!(list[0].contains("(1/2, 3/4)"));
        let ex = LacunarySpec::exploratory(0.9, 4, 5, 40, 1.0).unwrap();
        assert!(ex.hypothesis_violated);
    }

    #[test]
    fn coefficient_supports_are_disjoint() {
        let s = LacunarySpec::default();
        for j in 0..60 {
            assert!(s.a(j) * s.b(j) == 0.0);
            if j > s.start {
                assert!(s.a(j) + s.b(j) > 0.0);
            }
        }
    }

    #[test]
    fn real_and_overlapping_controls_vanish() {
        let quad = RadialQuadrature::new(400.0, 100, 16).unwrap();
        for pattern in [CoefficientPattern::RealOnly, CoefficientPattern::Overlapping] {
            let spec = LacunarySpec {
                n_max: 16,
                ..LacunarySpec::default()
            }
            .with_pattern(pattern);
            let s = antisym_partial_norms_with(&spec, &Ring::default(), &quad).unwrap();
            assert!(!s.rows.is_empty());
            assert!(s.rows.iter().all(|r| r.s_n == 0.0));
        }
    }

    #[test]
    fn single_term_matches_direct_quadrature() {
        let spec = LacunarySpec {
            n_max: 10,
            ..LacunarySpec::default()
        };
        let ring = Ring::default();
        let quad = default_quadrature();
        let s = antisym_partial_norms_with(&spec, &ring, &quad).unwrap();
        assert_eq!(s.rows.len(), 1);
        // j = 10 (even), k = 5 (odd): c = a_10 b_5.
        let c = spec.a(10) * spec.b(5);
        let samples: Vec<f64> = quad
            .nodes
            .iter()
            .map(|&r| (ring.value(r) * ring.value(r / 32.0)).powi(2))
            .collect();
        let direct = c.abs() * (SPHERE_AREA_4D * quad.integrate(&samples)).sqrt();
        assert!((s.rows[0].s_n - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn comparator_matches_closed_sum() {
        let spec = LacunarySpec::default();
        let c = comparator(&spec, 11);
        let e = (10f64.powf(-1.2) * 5f64.powf(0.8) + 11f64.powf(-1.2) * 6f64.powf(0.8)).sqrt();
        assert!((c - e).abs() < 1e-15);
        assert_eq!(comparator(&spec, 9), 0.0);
    }

    #[test]
    fn build_u0_truncates_and_rejects() {
        let g = Grid::new(1, 256, 2.0 * PI).unwrap();
        let spec = LacunarySpec {
            start: 2,
            ..LacunarySpec::default()
        };
        let f = build_u0(&spec, &g).unwrap();
        // nπ/L = 128, so shells up to j = 6.
        assert_eq!(f.used_max, 6);
        assert!(f.truncated);
        assert!(!f.field.is_zero());
        let coarse = Grid::new(1, 32, 2.0 * PI).unwrap();
        assert!(build_u0(&LacunarySpec::default(), &coarse).is_err());
        let empty = LacunarySpec {
            n_max: 4,
            ..LacunarySpec::default()
        };
        assert!(build_u0(&empty, &coarse).unwrap().field.is_zero());
    }
}
