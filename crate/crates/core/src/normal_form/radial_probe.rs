//! Boundary-term probes on radial fields in `R^4`.
//!
//! Fields are finite sums `Σ_j a_j χ_j(|ξ|)` of Littlewood-Paley pieces with
//! real coefficients, so `Ω` and `Ω̃` are radial and reduce to a 2D integral
//! over the low frequency `(ρ, θ)` with the `S³` measure `4π sin²θ dθ`. The
//! outputs are tabulated per shell pair on a dyadic Gauss-Legendre grid in
//! `|ξ|`; physical `L^p` norms of shell pieces go through a scaled inverse
//! Hankel transform. This reaches gaps `K` far beyond any periodic grid.

use super::probe::EnsembleSpec;
use super::{default_floor, ResonanceKind, ResonanceSymbol};
use crate::dyadic::{chi, chi_le};
use crate::error::{Result, ZakError};
use crate::illposed::bessel::bessel_j1;
use crate::illposed::radial::SPHERE_AREA_4D;
use gauss_quad::legendre::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// `|S³| / (2π)^4`, the radial Plancherel weight.
const PLANCHEREL: f64 = SPHERE_AREA_4D / (16.0 * PI * PI * PI * PI);
/// Left end of panel 0; panel `m` is `[0.4·2^m, 0.4·2^{m+1}]`.
const PANEL_BASE: f64 = 0.4;

fn gl(order: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(2)).expect("positive order"));
    let mut p: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    p
}

fn panel(m: i32) -> (f64, f64) {
    let a = PANEL_BASE * 2f64.powi(m);
    (a, 2.0 * a)
}

/// Resolution of the radial model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSetup {
    pub alpha: f64,
    /// Lowest and highest shell carried by the fields.
    pub j_lo: i32,
    pub j_hi: i32,
    /// Gauss-Legendre nodes per dyadic panel in `|ξ|`.
    pub panel_nodes: usize,
    /// Nodes per panel for the low-frequency radius.
    pub low_nodes: usize,
    pub theta_nodes: usize,
    /// Extent of the scaled physical variable `t = 2^k r`.
    pub t_max: f64,
}

impl Default for RadialSetup {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            j_lo: 0,
            j_hi: 12,
            panel_nodes: 40,
            low_nodes: 24,
            theta_nodes: 24,
            t_max: 64.0,
        }
    }
}

impl RadialSetup {
    /// Every node count doubled and the physical window widened by half.
    pub fn refined(&self) -> Self {
        Self {
            panel_nodes: 2 * self.panel_nodes,
            low_nodes: 2 * self.low_nodes,
            theta_nodes: 2 * self.theta_nodes,
            t_max: 1.5 * self.t_max,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            errs.push(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.j_lo != 0 {
            errs.push("radial model keeps the lowest shell at j_lo = 0".into());
        }
        if self.j_hi < self.j_lo + 6 {
            errs.push(format!("need j_hi >= j_lo + 6, got {}", self.j_hi));
        }
        if self.panel_nodes < 8 || self.low_nodes < 4 || self.theta_nodes < 4 {
            errs.push("node counts too small".into());
        }
        if !(self.t_max >= 8.0) {
            errs.push(format!("t_max must be at least 8, got {}", self.t_max));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ZakError::Config(errs))
        }
    }
}

/// Global `|ξ|` grid: panels `m_lo..=m_hi`, `g` nodes each.
struct FreqGrid {
    m_lo: i32,
    m_hi: i32,
    g: usize,
    rho: Vec<f64>,
    /// Gauss weight times `ρ³`.
    w: Vec<f64>,
}

impl FreqGrid {
    fn new(m_lo: i32, m_hi: i32, g: usize) -> Self {
        let rule = gl(g);
        let mut rho = Vec::new();
        let mut w = Vec::new();
        for m in m_lo..=m_hi {
            let (a, b) = panel(m);
            for &(x, wx) in &rule {
                let r = a + 0.5 * (b - a) * (x + 1.0);
                rho.push(r);
                w.push(0.5 * (b - a) * wx * r * r * r);
            }
        }
        Self {
            m_lo,
            m_hi,
            g,
            rho,
            w,
        }
    }

    fn panel_start(&self, m: i32) -> usize {
        (m - self.m_lo) as usize * self.g
    }
}

/// Interpolation from `g` Gauss nodes on `[-1,1]` to the point `x`.
fn lagrange_row(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(i) = nodes.iter().position(|n| *n == x) {
        let mut r = vec![0.0; nodes.len()];
        r[i] = 1.0;
        return r;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(n, b)| b / (x - n)).collect();
    let s: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / s).collect()
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let p: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / p
        })
        .collect()
}

/// Linear map from coarse Fourier samples on two adjacent panels to physical
/// samples on `[0, t_max]`, with a radial multiplier applied in between.
struct HankelMap {
    cols: usize,
    mat: Vec<f64>,
    /// Physical weights `2π² · gauss · t³`.
    vt: Vec<f64>,
}

impl HankelMap {
    /// `panels` are the two scaled panels, `g` coarse nodes each.
    fn new(panels: [(f64, f64); 2], g: usize, t_max: f64, mult: impl Fn(f64) -> f64) -> Self {
        let coarse = gl(g);
        let cx: Vec<f64> = coarse.iter().map(|p| p.0).collect();
        let bary = barycentric_weights(&cx);
        let fine_rule = gl(24);
        // physical grid: panels of width 0.5, 12 nodes
        let t_rule = gl(12);
        let t_panels = (t_max / 0.5).ceil() as usize;
        let mut t = Vec::new();
        let mut vt = Vec::new();
        for p in 0..t_panels {
            let a = 0.5 * p as f64;
            for &(x, w) in &t_rule {
                let tt = a + 0.25 * (x + 1.0);
                t.push(tt);
                vt.push(SPHERE_AREA_4D * 0.25 * w * tt * tt * tt);
            }
        }
        let cols = 2 * g;
        let mut mat = vec![0.0; t.len() * cols];
        for (pi, &(a, b)) in panels.iter().enumerate() {
            // sub-panels keep t_max·h/2 ≲ 10
            let subs = ((b - a) * t_max / 20.0).ceil().max(1.0) as usize;
            let h = (b - a) / subs as f64;
            for s in 0..subs {
                let sa = a + h * s as f64;
                for &(x, w) in &fine_rule {
                    let rho = sa + 0.5 * h * (x + 1.0);
                    let wq = 0.5 * h * w * rho.powi(3) * mult(rho) / (4.0 * PI * PI);
                    if wq == 0.0 {
                        continue;
                    }
                    let xr = 2.0 * (rho - a) / (b - a) - 1.0;
                    let row = lagrange_row(&cx, &bary, xr);
                    for (ti, &tt) in t.iter().enumerate() {
                        let z = tt * rho;
                        let k = if z < 1e-8 { 0.5 } else { bessel_j1(z) / z };
                        let base = ti * cols + pi * g;
                        let c = wq * k;
                        for (j, l) in row.iter().enumerate() {
                            mat[base + j] += c * l;
                        }
                    }
                }
            }
        }
        Self { cols, mat, vt }
    }

    fn lp(&self, vals: &[f64], p: f64) -> f64 {
        debug_assert_eq!(vals.len(), self.cols);
        let s: f64 = self
            .mat
            .chunks_exact(self.cols)
            .zip(&self.vt)
            .map(|(row, v)| {
                let f: f64 = row.iter().zip(vals).map(|(a, b)| a * b).sum();
                v * f.abs().powf(p)
            })
            .sum();
        s.powf(1.0 / p)
    }
}

/// Which normal-form operator a table holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialOp {
    Omega,
    OmegaTilde,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum High {
    First,
    Second,
}

/// `Op(χ_p, χ_q)` sampled on the output grid for every interacting pair.
struct PairTable {
    /// `(first-slot shell, second-slot shell, first node, values)`.
    entries: Vec<(i32, i32, usize, Vec<f64>)>,
}

/// Model state: frequency grid, quadrature rules and Hankel maps.
pub struct RadialModel {
    setup: RadialSetup,
    grid: FreqGrid,
    low_rule: Vec<(f64, f64)>,
    theta: Vec<(f64, f64)>,
    shell_map: HankelMap,
    low_map: HankelMap,
    floor: f64,
}

/// Real shell coefficients `a_j`, `j = j_lo..=j_hi`.
pub type Coeffs = Vec<f64>;

impl RadialModel {
    pub fn new(setup: RadialSetup) -> Result<Self> {
        setup.validate()?;
        let g = setup.panel_nodes;
        let grid = FreqGrid::new(setup.j_lo - 1, setup.j_hi + 2, g);
        let th: Vec<(f64, f64)> = gl(setup.theta_nodes)
            .into_iter()
            .map(|(x, w)| {
                let t = 0.5 * PI * (x + 1.0);
                (t.cos(), 0.5 * PI * w * t.sin().powi(2))
            })
            .collect();
        let scaled = [panel(0), panel(1)];
        let shell_map = HankelMap::new(scaled, g, setup.t_max, |r| chi(0, r));
        let low_map = HankelMap::new(scaled, g, 2.0 * setup.t_max, |r| chi_le(0, r));
        Ok(Self {
            setup,
            grid,
            low_rule: gl(setup.low_nodes),
            theta: th,
            shell_map,
            low_map,
            floor: default_floor(setup.alpha),
        })
    }

    pub fn setup(&self) -> &RadialSetup {
        &self.setup
    }

    pub fn shells(&self) -> usize {
        (self.setup.j_hi - self.setup.j_lo + 1) as usize
    }

    fn in_alpha_band(&self, k: i32) -> bool {
        (k as f64 - self.setup.alpha.log2()).abs() <= 1.0
    }

    /// Fourier profile `Σ a_j χ_j` on the output grid.
    pub fn profile(&self, a: &[f64]) -> Vec<f64> {
        self.grid
            .rho
            .iter()
            .map(|&r| {
                a.iter()
                    .enumerate()
                    .map(|(i, c)| if *c == 0.0 { 0.0 } else { c * chi(self.setup.j_lo + i as i32, r) })
                    .sum()
            })
            .collect()
    }

    /// `‖F‖_{H^s}` with weight `⟨ρ⟩^{2s}`.
    pub fn h_norm(&self, f: &[f64], s: f64) -> f64 {
        let e: f64 = f
            .iter()
            .zip(&self.grid.rho)
            .zip(&self.grid.w)
            .map(|((v, r), w)| w * (1.0 + r * r).powf(s) * v * v)
            .sum();
        (PLANCHEREL * e).sqrt()
    }

    fn panel_values<'a>(&self, f: &'a [f64], k: i32) -> &'a [f64] {
        let a = self.grid.panel_start(k);
        &f[a..a + 2 * self.grid.g]
    }

    /// `‖P_k F‖_{L^p}`.
    pub fn shell_lp(&self, f: &[f64], k: i32, p: f64) -> f64 {
        if k < self.grid.m_lo || k + 1 > self.grid.m_hi {
            return 0.0;
        }
        let v = self.panel_values(f, k);
        if v.iter().all(|x| *x == 0.0) {
            return 0.0;
        }
        2f64.powf(4.0 * k as f64 * (1.0 - 1.0 / p)) * self.shell_map.lp(v, p)
    }

    /// Inhomogeneous `B^s_{p,2}`: `P_{≤0}` plus shells `k ≥ 1`.
    pub fn besov(&self, f: &[f64], s: f64, p: f64) -> f64 {
        debug_assert!(f[..self.grid.panel_start(0)].iter().all(|x| *x == 0.0));
        let low = self.low_map.lp(self.panel_values(f, 0), p);
        let mut e = low * low;
        for k in 1..self.grid.m_hi {
            let n = self.shell_lp(f, k, p);
            e += (2f64.powf(k as f64 * s) * n).powi(2);
        }
        e.sqrt()
    }

    /// Homogeneous `Ḃ^s_{p,2}` over every shell of the grid.
    pub fn homogeneous_besov(&self, f: &[f64], s: f64, p: f64) -> f64 {
        (self.grid.m_lo..self.grid.m_hi)
            .map(|k| (2f64.powf(k as f64 * s) * self.shell_lp(f, k, p)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn pair_values(&self, op: RadialOp, high: High, hs: i32, ls: i32, gap: i32) -> Result<(usize, Vec<f64>)> {
        let start = self.grid.panel_start(hs - 1);
        let end = self.grid.panel_start(hs + 2).min(self.grid.rho.len());
        let alpha = self.setup.alpha;
        let kind = match op {
            RadialOp::Omega => ResonanceKind::Schrod,
            RadialOp::OmegaTilde => ResonanceKind::Wave,
        };
        let sym = ResonanceSymbol::new(kind, alpha).with_floor(self.floor);
        let ks: Vec<i32> = (hs - 1..=hs + 1).filter(|k| !self.in_alpha_band(*k)).collect();
        let mut low = Vec::new();
        for m in [ls, ls + 1] {
            let (a, b) = panel(m);
            for &(x, w) in &self.low_rule {
                let r = a + 0.5 * (b - a) * (x + 1.0);
                let c = chi(ls, r);
                if c != 0.0 {
                    low.push((r, 0.5 * (b - a) * w * r.powi(3) * c));
                }
            }
        }
        let pref = 4.0 * PI / (16.0 * PI.powi(4));
        let mut out = Vec::with_capacity(end - start);
        for &x in &self.grid.rho[start..end] {
            let mut acc = 0.0;
            for &(r, wr) in &low {
                for &(cos, wt) in &self.theta {
                    let h2 = x * x + r * r - 2.0 * x * r * cos;
                    let h = h2.max(0.0).sqrt();
                    let fh = chi(hs, h);
                    if fh == 0.0 {
                        continue;
                    }
                    let wgt: f64 = ks.iter().map(|&k| chi(k, h) * chi_le(k - gap, r)).sum();
                    if wgt == 0.0 {
                        continue;
                    }
                    let (z2, e2) = match high {
                        High::First => (h2, r * r),
                        High::Second => (r * r, h2),
                    };
                    let den = sym.denominator(z2, e2, x * x);
                    if den.abs() < sym.floor {
                        let (f, s) = match high {
                            High::First => (hs, ls),
                            High::Second => (ls, hs),
                        };
                        return Err(ZakError::Resonance {
                            value: den,
                            floor: sym.floor,
                            first: f,
                            second: s,
                        });
                    }
                    acc += wr * wt * fh * wgt * sym.numerator() / den;
                }
            }
            out.push(pref * acc);
        }
        Ok((start, out))
    }

    fn table(&self, op: RadialOp, gap: u32) -> Result<PairTable> {
        let gap = gap as i32;
        let highs: &[High] = match op {
            RadialOp::Omega => &[High::First],
            RadialOp::OmegaTilde => &[High::First, High::Second],
        };
        let mut jobs = Vec::new();
        for &h in highs {
            for hs in self.setup.j_lo..=self.setup.j_hi {
                for ls in self.setup.j_lo..=self.setup.j_hi {
                    let reach = (hs - 1..=hs + 1).any(|k| !self.in_alpha_band(k) && ls <= k - gap + 1);
                    if reach {
                        jobs.push((h, hs, ls));
                    }
                }
            }
        }
        let entries = jobs
            .par_iter()
            .map(|&(h, hs, ls)| {
                let (start, v) = self.pair_values(op, h, hs, ls, gap)?;
                let (p, q) = match h {
                    High::First => (hs, ls),
                    High::Second => (ls, hs),
                };
                Ok((p, q, start, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PairTable { entries })
    }

    fn apply(&self, t: &PairTable, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.rho.len()];
        let lo = self.setup.j_lo;
        for (p, q, start, v) in &t.entries {
            let c = x[(p - lo) as usize] * y[(q - lo) as usize];
            if c == 0.0 {
                continue;
            }
            for (o, val) in out[*start..].iter_mut().zip(v) {
                *o += c * val;
            }
        }
        out
    }
}

/// Tabulated `Ω` and `Ω̃` at one gap.
pub struct RadialOperators<'a> {
    model: &'a RadialModel,
    gap: u32,
    omega: PairTable,
    omega_tilde: PairTable,
}

impl<'a> RadialOperators<'a> {
    pub fn new(model: &'a RadialModel, gap: u32) -> Result<Self> {
        if gap < 5 {
            return Err(ZakError::GapTooSmall(gap));
        }
        Ok(Self {
            model,
            gap,
            omega: model.table(RadialOp::Omega, gap)?,
            omega_tilde: model.table(RadialOp::OmegaTilde, gap)?,
        })
    }

    pub fn gap(&self) -> u32 {
        self.gap
    }

    /// Fourier profile of `Ω(N, u)`.
    pub fn omega(&self, n: &[f64], u: &[f64]) -> Vec<f64> {
        self.model.apply(&self.omega, n, u)
    }

    /// Fourier profile of `Ω̃(u, v)` (real fields, so `v̄ = v`).
    pub fn omega_tilde(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.model.apply(&self.omega_tilde, u, v)
    }

    /// Ratios of the four boundary estimates at `(s, l)` for one sample;
    /// `None` where the right-hand side vanishes.
    pub fn boundary_ratios(&self, sample: &RadialSample, s: f64, l: f64) -> [Option<f64>; 4] {
        let m = self.model;
        let (pn, pu, pv) = (m.profile(&sample.n), m.profile(&sample.u), m.profile(&sample.v));
        let (n_l, u_s, v_s) = (m.h_norm(&pn, l), m.h_norm(&pu, s), m.h_norm(&pv, s));
        let (u_b, v_b) = (m.besov(&pu, s, 4.0), m.besov(&pv, s, 4.0));
        let om = self.omega(&sample.n, &sample.u);
        let ot = self.omega_tilde(&sample.u, &sample.v);
        let d_ot: Vec<f64> = ot.iter().zip(&m.grid.rho).map(|(v, r)| v * r).collect();
        let jl_ot: Vec<f64> = ot
            .iter()
            .zip(&m.grid.rho)
            .map(|(v, r)| v * (1.0 + r * r).powf(0.5 * l))
            .collect();
        let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
        [
            ratio(m.h_norm(&om, s), n_l * u_s),
            ratio(m.h_norm(&d_ot, l), u_s * v_s),
            ratio(m.besov(&om, s, 4.0), n_l * u_b),
            ratio(
                m.homogeneous_besov(&jl_ot, 1.0 / 6.0, 6.0),
                u_b * v_s + v_b * u_s,
            ),
        ]
    }
}

/// Energy profile of a random sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Flat,
    Critical,
    SingleShell,
    Zero,
}

/// Coefficients of `N`, `u`, `v` for one ensemble member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub seed: u64,
    pub profile: Profile,
    pub n: Coeffs,
    pub u: Coeffs,
    pub v: Coeffs,
}

impl RadialSample {
    /// Positive random amplitudes; `Critical` scales shell `j` by `2^{-j(σ+2)}`
    /// so that every shell carries comparable `H^σ` energy.
    pub fn draw(setup: &RadialSetup, seed: u64, profile: Profile, s: f64, l: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = (setup.j_hi - setup.j_lo + 1) as usize;
        let mut slot = |sigma: f64| -> Coeffs {
            match profile {
                Profile::Flat => (0..count).map(|_| rng.gen_range(0.2..1.0)).collect(),
                Profile::Critical => (0..count)
                    .map(|i| {
                        let j = (setup.j_lo + i as i32) as f64;
                        rng.gen_range(0.2..1.0) * 2f64.powf(-j * (sigma + 2.0))
                    })
                    .collect(),
                Profile::SingleShell => {
                    let mut c = vec![0.0; count];
                    c[rng.gen_range(0..count)] = 1.0;
                    c
                }
                Profile::Zero => vec![0.0; count],
            }
        };
        let n = slot(l);
        let u = slot(s);
        let v = slot(s);
        Self {
            seed,
            profile,
            n,
            u,
            v,
        }
    }
}

/// Fixed ensemble cycling through the probe profiles.
pub fn radial_ensemble(setup: &RadialSetup, spec: &EnsembleSpec, s: f64, l: f64) -> Vec<RadialSample> {
    (0..spec.size)
        .map(|i| RadialSample::draw(setup, spec.sample_seed(i), spec.profile(i), s, l))
        .collect()
}
