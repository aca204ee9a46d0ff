//! Radial functions on `R^4`: composite Gauss-Legendre quadrature in `r³ dr`,
//! the Hankel pair of the 4D Fourier transform, and the ring profile `φ`.

use super::bessel::bessel_j012;
use crate::error::{Result, ZakError};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Area of the unit sphere `S³`.
pub const SPHERE_AREA_4D: f64 = 2.0 * PI * PI;

/// `(2π)^{-2}`.
const INV_TWO_PI_SQ: f64 = 1.0 / (4.0 * PI * PI);

/// Composite Gauss-Legendre rule on `[0, r_max]`; weights include `r³`.
#[derive(Clone, Debug)]
pub struct RadialQuadrature {
    pub r_max: f64,
    pub panels: usize,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialQuadrature {
    pub fn new(r_max: f64, panels: usize, order: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) || panels == 0 || order < 2 {
            return Err(ZakError::Quadrature(format!(
                "bad radial rule: r_max={r_max}, panels={panels}, order={order}"
            )));
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order >= 2"));
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let h = r_max / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = p as f64 * h;
            for &(x, w) in &pairs {
                let r = a + 0.5 * h * (x + 1.0);
                nodes.push(r);
                weights.push(0.5 * h * w * r * r * r);
            }
        }
        Ok(Self {
            r_max,
            panels,
            order,
            nodes,
            weights,
        })
    }

    /// The same interval with twice the panels.
    pub fn refined(&self) -> Self {
        Self::new(self.r_max, 2 * self.panels, self.order).expect("refining a valid rule")
    }

    /// `∫_0^{r_max} f(r) r³ dr` for samples at the nodes.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Sampled radial function with the quadrature that carries it.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub nodes: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Weights for `∫ f(r) r³ dr`; the sphere area is applied separately.
    pub weights: Vec<f64>,
}

impl RadialProfile {
    pub fn from_fn(quad: &RadialQuadrature, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            nodes: quad.nodes.clone(),
            values: quad.nodes.iter().map(|&r| f(r)).collect(),
            weights: quad.weights.clone(),
        }
    }

    /// `∫_0^∞ f(r) r³ dr`.
    pub fn radial_integral(&self) -> Complex64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `‖f‖_{L^p(R^4)}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v.norm().powf(p) * w)
            .sum();
        (SPHERE_AREA_4D * s).powf(1.0 / p)
    }

    /// `f̂(ρ) = (2π)² ρ^{-1} ∫ f(r) J1(rρ) r² dr`.
    pub fn fourier(&self, rho: f64) -> Complex64 {
        let s: Complex64 = self
            .nodes
            .iter()
            .zip(&self.values)
            .zip(&self.weights)
            .map(|((&r, v), w)| v * (w * kernel(r * rho).0))
            .sum();
        s * (4.0 * PI * PI)
    }
}

/// `(J1(x)/x, d/dx, d²/dx²)`, the radial kernel of the 4D transform and its derivatives.
pub fn kernel(x: f64) -> (f64, f64, f64) {
    let x = x.abs();
    if x < 1e-4 {
        let x2 = x * x;
        return (
            0.5 - x2 / 16.0 + x2 * x2 / 384.0,
            -x / 8.0 + x * x2 / 96.0,
            -0.125 + x2 / 32.0,
        );
    }
    let (_, j1, j2) = bessel_j012(x);
    (j1 / x, -j2 / x, (3.0 * j2 - x * j1) / (x * x))
}

/// `∫_0^{r_max} |f(r)| r³ dr`, splitting at the sign changes of `f` so that each
/// Gauss-Legendre segment sees a smooth integrand.
pub fn abs_moment(f: impl Fn(f64) -> f64 + Sync, r_max: f64, step: f64, order: usize) -> f64 {
    use rayon::prelude::*;
    let m = (r_max / step).ceil() as usize;
    let h = r_max / m as f64;
    let samples: Vec<f64> = (0..=m).into_par_iter().map(|i| f(i as f64 * h)).collect();
    let mut breaks = vec![0.0];
    for i in 0..m {
        let (a, b) = (samples[i], samples[i + 1]);
        if a == 0.0 && i > 0 {
            breaks.push(i as f64 * h);
        } else if a * b < 0.0 {
            breaks.push(illinois(&f, i as f64 * h, (i + 1) as f64 * h, a, b));
        }
    }
    breaks.push(r_max);
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order > 0"));
    let pairs = rule.as_node_weight_pairs();
    breaks
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let pieces = ((b - a) / (4.0 * step)).ceil().max(1.0) as usize;
            let len = (b - a) / pieces as f64;
            let mut s = 0.0;
            for p in 0..pieces {
                let lo = a + p as f64 * len;
                for &(x, wt) in pairs {
                    let r = lo + 0.5 * len * (x + 1.0);
                    s += 0.5 * len * wt * f(r) * r * r * r;
                }
            }
            s.abs()
        })
        .sum()
}

/// Root of `f` in a sign-changing bracket by the Illinois variant of regula falsi.
fn illinois(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * b.abs() {
            return c;
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (fa.abs().min(fb.abs())) == 0.0 {
            break;
        }
        let width = (b - a).abs();
        if width <= 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Bump `e^4 exp(-1/(t(1-t)))` on `(0,1)`, peak value 1 at `t = 1/2`.
pub fn ring_bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (4.0 - 1.0 / (t * (1.0 - t))).exp()
    }
}

/// Value and first two radial derivatives of a radial function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RadialJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl RadialJet {
    /// `Δf = f'' + 3 f'/r` in four dimensions.
    pub fn laplacian(&self, r: f64) -> f64 {
        if r == 0.0 {
            4.0 * self.d2
        } else {
            self.d2 + 3.0 * self.d1 / r
        }
    }

}

/// Radial `φ` with `φ̂(ρ)` a smooth bump on `[inner, outer]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ring {
    pub inner: f64,
    pub outer: f64,
}

impl Ring {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.8 && outer < 1.2 && inner < outer) {
            return Err(ZakError::InvalidParameter(format!(
                "ring [{inner}, {outer}] must satisfy 0.8 < inner < outer < 1.2"
            )));
        }
        Ok(Self { inner, outer })
    }

    /// `φ̂(ρ)`, with values in `[0, 1]`.
    pub fn fourier(&self, rho: f64) -> f64 {
        ring_bump((rho - self.inner) / (self.outer - self.inner))
    }

    /// `φ`, `φ'`, `φ''` at `r` from the inverse transform
    /// `φ(r) = (2π)^{-2} ∫ φ̂(ρ) [J1(rρ)/(rρ)] ρ³ dρ`.
    ///
    /// The bump vanishes to all orders at both ends, so the trapezoid rule
    /// converges faster than any power; the node count tracks the oscillation `rρ`.
    pub fn jet(&self, r: f64) -> RadialJet {
        let w = self.outer - self.inner;
        let m = 128 + (1.5 * r * w).ceil() as usize;
        let h = w / m as f64;
        let mut out = RadialJet::default();
        for i in 1..m {
            let rho = self.inner + i as f64 * h;
            let b = self.fourier(rho);
            if b == 0.0 {
                continue;
            }
            let (g0, g1, g2) = kernel(r * rho);
            let r3 = rho * rho * rho;
            out.value += b * r3 * g0;
            out.d1 += b * r3 * rho * g1;
            out.d2 += b * r3 * rho * rho * g2;
        }
        let c = h * INV_TWO_PI_SQ;
        out.value *= c;
        out.d1 *= c;
        out.d2 *= c;
        out
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).value
    }

    /// `‖φ‖_{L²}` from Plancherel on the Fourier side.
    pub fn l2_norm(&self) -> f64 {
        let s = self.fourier_moment(|rho| rho.powi(3));
        (SPHERE_AREA_4D * INV_TWO_PI_SQ * INV_TWO_PI_SQ * s).sqrt()
    }

    /// `∫ φ̂(ρ)² m(ρ) dρ` by the trapezoid rule.
    pub fn fourier_moment(&self, m: impl Fn(f64) -> f64) -> f64 {
        let n = 4096;
        let h = (self.outer - self.inner) / n as f64;
        (1..n)
            .map(|i| {
                let rho = self.inner + i as f64 * h;
                let b = self.fourier(rho);
                b * b * m(rho)
            })
            .sum::<f64>()
            * h
    }
}

impl Default for Ring {
    fn default() -> Self {
        Self {
            inner: 0.85,
            outer: 1.15,
        }
    }
}

/// Default rule for `φ`: its envelope is below `1e-16` past `r = 800`.
pub fn default_quadrature() -> RadialQuadrature {
    RadialQuadrature::new(800.0, 400, 16).expect("static rule")
}

/// `φ` sampled on the default rule, checked against the doubled rule.
pub fn ring_profile(inner: f64, outer: f64) -> Result<RadialProfile> {
    let ring = Ring::new(inner, outer)?;
    let quad = default_quadrature();
    let coarse = RadialProfile::from_fn(&quad, |r| Complex64::new(ring.value(r), 0.0));
    let fine = RadialProfile::from_fn(&quad.refined(), |r| Complex64::new(ring.value(r), 0.0));
    let a = coarse.lp_norm(2.0);
    let b = fine.lp_norm(2.0);
    if !((a - b).abs() <= 1e-8 * b) {
        return Err(ZakError::Quadrature(format!(
            "ring profile L2 norm moved from {a:e} to {b:e} under refinement"
        )));
    }
    Ok(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_moments() {
        let q = RadialQuadrature::new(3.0, 5, 8).unwrap();
        let ones = vec![1.0; q.len()];
        assert!((q.integrate(&ones) - 81.0 / 4.0).abs() < 1e-12);
        let g: Vec<f64> = q.nodes.iter().map(|r| (-r * r).exp()).collect();
        // ∫_0^3 e^{-r²} r³ dr = (1 - 10 e^{-9}) / 2.
        let exact = 0.5 * (1.0 - 10.0 * (-9.0f64).exp());
        assert!((q.integrate(&g) - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_transform_pair() {
        // e^{-r²/2} on R^4 has transform (2π)² e^{-ρ²/2}.
        let q = RadialQuadrature::new(12.0, 24, 16).unwrap();
        let p = RadialProfile::from_fn(&q, |r| Complex64::new((-0.5 * r * r).exp(), 0.0));
        for rho in [0.0f64, 0.3, 1.0, 2.5] {
            let exact = 4.0 * PI * PI * (-0.5 * rho * rho).exp();
            assert!((p.fourier(rho).re - exact).abs() < 1e-10 * 4.0 * PI * PI);
        }
        let l2 = p.lp_norm(2.0);
        // ∫ e^{-r²} over R^4 = π².
        assert!((l2 - PI).abs() < 1e-12);
    }

    #[test]
    fn kernel_derivatives_match_differences() {
        for x in [2e-4f64, 0.3, 5.0, 17.0, 40.0] {
            let h = 1e-5 * x.max(1.0);
            let (g, g1, g2) = kernel(x);
            let (gp, g1p, _) = kernel(x + h);
            let (gm, g1m, _) = kernel(x - h);
            assert!(((gp - gm) / (2.0 * h) - g1).abs() < 1e-8, "x={x}");
            assert!(((g1p - g1m) / (2.0 * h) - g2).abs() < 1e-8, "x={x}");
            assert!(g.is_finite());
        }
        let (a, b, c) = kernel(0.0);
        assert_eq!((a, b, c), (0.5, 0.0, -0.125));
    }

    #[test]
    fn ring_is_positive_at_origin_and_round_trips() {
        let ring = Ring::default();
        let c = ring.value(0.0);
        assert!(c > 0.0);
        let p = ring_profile(ring.inner, ring.outer).unwrap();
        for i in 0..=20 {
            let rho = 0.8 + 0.4 * i as f64 / 20.0;
            let back = p.fourier(rho);
            assert!((back.re - ring.fourier(rho)).abs() < 1e-8, "rho={rho}");
            assert!(back.im == 0.0);
        }
        // Plancherel against the sampled profile.
        let l2 = p.lp_norm(2.0);
        assert!((l2 - ring.l2_norm()).abs() < 1e-9 * l2);
    }

    #[test]
    fn ring_jet_is_consistent() {
        let ring = Ring::default();
        for r in [0.0, 0.7, 3.0, 20.0, 90.0] {
            let h = 1e-4;
            let j = ring.jet(r);
            let jp = ring.jet(r + h);
            let jm = ring.jet((r - h).abs());
            let d1 = (jp.value - jm.value) / (2.0 * h);
            let d2 = (jp.value - 2.0 * j.value + jm.value) / (h * h);
            let scale = ring.value(0.0);
            assert!((d1 - j.d1).abs() < 1e-7 * scale, "r={r} {d1} {} {scale}", j.d1);
            assert!((d2 - j.d2).abs() < 1e-5 * scale, "r={r}");
        }
    }

    #[test]
    fn ring_rejects_wide_support() {
        assert!(Ring::new(0.7, 1.1).is_err());
        assert!(Ring::new(1.0, 0.9).is_err());
    }
}
