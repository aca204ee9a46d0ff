//! Empirical left/right norm ratios of the quadratic, boundary and cubic
//! estimates, tabulated against the frequency gap `K`.

use super::radial_probe::{radial_ensemble, Profile, RadialModel, RadialOperators, RadialSetup};
use super::{d_omega_tilde, default_floor, omega};
use crate::dyadic::{besov_norm, paraproduct_sum, sobolev_norm, BesovSpec, DyadicConfig, Interaction};
use crate::error::{Result, ZakError};
use crate::grid::{Grid, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Estimate being probed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    #[serde(rename = "quad-LH")]
    QuadLh,
    #[serde(rename = "quad-HH")]
    QuadHh,
    #[serde(rename = "quad-wave")]
    QuadWave,
    #[serde(rename = "boundary-1")]
    Boundary1,
    #[serde(rename = "boundary-2")]
    Boundary2,
    #[serde(rename = "boundary-3")]
    Boundary3,
    #[serde(rename = "boundary-4")]
    Boundary4,
    #[serde(rename = "cubic-1")]
    Cubic1,
    #[serde(rename = "cubic-2")]
    Cubic2,
    #[serde(rename = "cubic-3")]
    Cubic3,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

impl LemmaId {
    pub const ALL: [LemmaId; 10] = [
        LemmaId::QuadLh,
        LemmaId::QuadHh,
        LemmaId::QuadWave,
        LemmaId::Boundary1,
        LemmaId::Boundary2,
        LemmaId::Boundary3,
        LemmaId::Boundary4,
        LemmaId::Cubic1,
        LemmaId::Cubic2,
        LemmaId::Cubic3,
    ];

    pub const BOUNDARY: [LemmaId; 4] = [
        LemmaId::Boundary1,
        LemmaId::Boundary2,
        LemmaId::Boundary3,
        LemmaId::Boundary4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::QuadLh => "quad-LH",
            LemmaId::QuadHh => "quad-HH",
            LemmaId::QuadWave => "quad-wave",
            LemmaId::Boundary1 => "boundary-1",
            LemmaId::Boundary2 => "boundary-2",
            LemmaId::Boundary3 => "boundary-3",
            LemmaId::Boundary4 => "boundary-4",
            LemmaId::Cubic1 => "cubic-1",
            LemmaId::Cubic2 => "cubic-2",
            LemmaId::Cubic3 => "cubic-3",
        }
    }

    /// Whether `(s, l)` satisfies the estimate's hypotheses.
    pub fn hypothesis_holds(self, s: f64, l: f64) -> bool {
        match self {
            LemmaId::QuadLh | LemmaId::QuadHh => s >= 0.0 && l >= 0.0,
            LemmaId::QuadWave => 0.0 <= l + 1.0 && l + 1.0 <= 2.0 * s,
            LemmaId::Boundary1 => l >= 0f64.max(s - 2.0) && !(near(s, 2.0) && near(l, 0.0)),
            LemmaId::Boundary2 => l <= (2.0 * s - 1.0).min(s + 1.0) && !(near(s, 2.0) && near(l, 3.0)),
            LemmaId::Boundary3 => l >= 0f64.min(s - 1.0) && !(near(s, 1.0) && near(l, 0.0)),
            LemmaId::Boundary4 => {
                l <= (2.0 * s - 0.5).min(s + 1.5) && !(near(s, 2.0) && near(l, 3.5))
            }
            LemmaId::Cubic1 => s >= 0.5,
            LemmaId::Cubic2 => {
                l >= 0.0 && -l < s && s <= l + 2.0 && s <= 2.0 * l + 1.0 && !(near(s, 1.0) && near(l, 0.0))
            }
            LemmaId::Cubic3 => {
                s >= 0.5 && -s < l && l <= s + 1.0 && l <= 2.0 * s && !(near(s, 1.0) && near(l, 2.0))
            }
        }
    }

    /// Whether the gain `2^{-θK}` has `θ > 0` at `(s, l)`; `None` for the
    /// quadratic estimates, which carry no gap factor.
    pub fn theta_positive(self, s: f64, l: f64) -> Option<bool> {
        match self {
            LemmaId::QuadLh | LemmaId::QuadHh | LemmaId::QuadWave => None,
            LemmaId::Boundary1 => Some(s < l + 2.0),
            LemmaId::Boundary2 => Some(l < s + 1.0),
            LemmaId::Boundary3 => Some(s < l + 1.0),
            LemmaId::Boundary4 => Some(l < s + 1.5),
            LemmaId::Cubic1 => Some(true),
            LemmaId::Cubic2 => Some(s < l + 2.0),
            LemmaId::Cubic3 => Some(l < s + 1.0),
        }
    }

    fn boundary_index(self) -> Option<usize> {
        LemmaId::BOUNDARY.iter().position(|b| *b == self)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = ZakError;
    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| ZakError::InvalidParameter(format!("unknown lemma id {s:?}")))
    }
}

/// Random ensemble: `size` members with seeds `seed, seed+1, …`, cycling
/// through `profiles`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub size: usize,
    pub seed: u64,
    pub profiles: Vec<Profile>,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            size: 50,
            seed: 20240601,
            profiles: vec![Profile::Flat, Profile::Critical, Profile::SingleShell],
        }
    }
}

impl EnsembleSpec {
    pub fn zero(size: usize) -> Self {
        Self {
            size,
            seed: 0,
            profiles: vec![Profile::Zero],
        }
    }

    pub fn sample_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }

    pub fn profile(&self, i: usize) -> Profile {
        if self.profiles.is_empty() {
            Profile::Flat
        } else {
            self.profiles[i % self.profiles.len()]
        }
    }
}

/// Where the ratios are evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ProbeBackend {
    /// Periodic grid; every estimate.
    Grid { dim: usize, n: usize, length: f64 },
    /// Radial fields in `R^4`; boundary estimates only.
    Radial(RadialSetup),
}

impl ProbeBackend {
    pub fn label(&self) -> String {
        match self {
            ProbeBackend::Grid { dim, n, length } => format!("grid(d={dim},n={n},L={length})"),
            ProbeBackend::Radial(r) => format!("radial-4d(shells {}..{})", r.j_lo, r.j_hi),
        }
    }
}

/// Trend of the sup ratio in `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KDecay {
    Decaying,
    Flat,
    Growing,
}

impl fmt::Display for KDecay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KDecay::Decaying => "decaying",
            KDecay::Flat => "flat",
            KDecay::Growing => "growing",
        })
    }
}

/// One evaluated sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub lemma: LemmaId,
    pub s: f64,
    pub l: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub sample_seed: u64,
    pub ratio: f64,
}

/// Sup over the ensemble at one `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KRow {
    #[serde(rename = "K")]
    pub k: u32,
    pub sup_ratio: f64,
    pub argmax_seed: Option<u64>,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub lemma: LemmaId,
    pub s: f64,
    pub l: f64,
    pub backend: String,
    pub samples: usize,
    /// Sup over every `K` and sample.
    pub sup_ratio: f64,
    pub table: Vec<KRow>,
    /// Samples with vanishing right-hand side, summed over `K`.
    pub skipped: usize,
    pub hypothesis_violated: bool,
    pub theta_positive: Option<bool>,
    /// Minus the least-squares slope of `log₂ sup` against `K`.
    pub theta_fit: Option<f64>,
    pub verdict: KDecay,
    pub non_increasing: bool,
    #[serde(skip)]
    pub rows: Vec<ProbeRow>,
}

/// `|θ_fit|` at or below this counts as flat.
pub const FLAT_SLOPE: f64 = 0.1;

fn fit_theta(table: &[KRow]) -> (Option<f64>, KDecay) {
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|r| r.sup_ratio > 0.0)
        .map(|r| (r.k as f64, r.sup_ratio.log2()))
        .collect();
    let zeros_after_positive = table
        .iter()
        .skip_while(|r| r.sup_ratio <= 0.0)
        .any(|r| r.sup_ratio <= 0.0);
    if pts.len() < 2 {
        let v = if zeros_after_positive {
            KDecay::Decaying
        } else {
            KDecay::Flat
        };
        return (None, v);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let theta = -sxy / sxx;
    let verdict = if zeros_after_positive || theta > FLAT_SLOPE {
        KDecay::Decaying
    } else if theta < -FLAT_SLOPE {
        KDecay::Growing
    } else {
        KDecay::Flat
    };
    (Some(theta), verdict)
}

impl ProbeReport {
    fn assemble(
        lemma: LemmaId,
        s: f64,
        l: f64,
        backend: &ProbeBackend,
        samples: usize,
        gaps: &[u32],
        ratios: &[Vec<(u64, Option<f64>)>],
    ) -> Self {
        let mut rows = Vec::new();
        let mut table = Vec::new();
        for (&k, per) in gaps.iter().zip(ratios) {
            let mut sup = 0.0;
            let mut arg = None;
            let mut skipped = 0;
            for &(seed, r) in per {
                match r {
                    Some(r) => {
                        if r > sup || arg.is_none() {
                            sup = r.max(sup);
                            arg = Some(seed);
                        }
                        rows.push(ProbeRow {
                            lemma,
                            s,
                            l,
                            k,
                            sample_seed: seed,
                            ratio: r,
                        });
                    }
                    None => skipped += 1,
                }
            }
            table.push(KRow {
                k,
                sup_ratio: sup,
                argmax_seed: arg,
                skipped,
            });
        }
        let (theta_fit, verdict) = fit_theta(&table);
        Self {
            lemma,
            s,
            l,
            backend: backend.label(),
            samples,
            sup_ratio: table.iter().map(|r| r.sup_ratio).fold(0.0, f64::max),
            skipped: table.iter().map(|r| r.skipped).sum(),
            non_increasing: table.windows(2).all(|w| w[1].sup_ratio <= w[0].sup_ratio),
            table,
            hypothesis_violated: !lemma.hypothesis_holds(s, l),
            theta_positive: lemma.theta_positive(s, l),
            theta_fit,
            verdict,
            rows,
        }
    }

    pub const CSV_HEADER: &'static str = "lemma,s,l,K,sample_seed,ratio";

    pub fn write_csv<W: Write>(&self, w: &mut W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(w, "{}", Self::CSV_HEADER)?;
        }
        for r in &self.rows {
            writeln!(w, "{},{:e},{:e},{},{},{:e}", r.lemma, r.s, r.l, r.k, r.sample_seed, r.ratio)?;
        }
        Ok(())
    }

    pub fn sup_at(&self, k: u32) -> Option<f64> {
        self.table.iter().find(|r| r.k == k).map(|r| r.sup_ratio)
    }
}

/// Gaps used when none are given.
pub const DEFAULT_GAPS: [u32; 5] = [5, 6, 7, 8, 9];

fn check_gaps(gaps: &[u32]) -> Result<()> {
    if gaps.is_empty() {
        return Err(ZakError::InvalidParameter("no frequency gaps given".into()));
    }
    if let Some(k) = gaps.iter().find(|k| **k < 5) {
        return Err(ZakError::GapTooSmall(*k));
    }
    if gaps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ZakError::InvalidParameter("gaps must increase".into()));
    }
    Ok(())
}

/// Ratio table of one estimate over `gaps`.
pub fn probe_estimate(
    lemma: LemmaId,
    s: f64,
    l: f64,
    alpha: f64,
    gaps: &[u32],
    backend: &ProbeBackend,
    ensemble: &EnsembleSpec,
) -> Result<ProbeReport> {
    check_gaps(gaps)?;
    match backend {
        ProbeBackend::Grid { dim, n, length } => {
            let grid = Grid::new(*dim, *n, *length)?;
            let ratios = gaps
                .iter()
                .map(|&k| {
                    let cfg = DyadicConfig::new(&grid, k, alpha)?;
                    (0..ensemble.size)
                        .into_par_iter()
                        .map(|i| {
                            let seed = ensemble.sample_seed(i);
                            let smp = GridSample::draw(&cfg, seed, ensemble.profile(i), s, l);
                            Ok((seed, grid_ratio(lemma, &smp, s, l, &cfg)?))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ProbeReport::assemble(lemma, s, l, backend, ensemble.size, gaps, &ratios))
        }
        ProbeBackend::Radial(setup) => {
            if lemma.boundary_index().is_none() {
                return Err(ZakError::InvalidParameter(format!(
                    "the radial backend only carries the boundary estimates, not {lemma}"
                )));
            }
            let all = probe_boundary_radial(s, l, gaps, &RadialSetup { alpha, ..*setup }, ensemble)?;
            Ok(all.into_iter().find(|r| r.lemma == lemma).expect("boundary lemma"))
        }
    }
}

/// The four boundary estimates on radial fields, sharing the operator tables.
pub fn probe_boundary_radial(
    s: f64,
    l: f64,
    gaps: &[u32],
    setup: &RadialSetup,
    ensemble: &EnsembleSpec,
) -> Result<Vec<ProbeReport>> {
    check_gaps(gaps)?;
    let model = RadialModel::new(*setup)?;
    let samples = radial_ensemble(setup, ensemble, s, l);
    let mut per_lemma: Vec<Vec<Vec<(u64, Option<f64>)>>> = vec![Vec::new(); 4];
    for &k in gaps {
        let ops = RadialOperators::new(&model, k)?;
        let r: Vec<[Option<f64>; 4]> = samples
            .par_iter()
            .map(|smp| ops.boundary_ratios(smp, s, l))
            .collect();
        for (b, col) in per_lemma.iter_mut().enumerate() {
            col.push(samples.iter().zip(&r).map(|(smp, x)| (smp.seed, x[b])).collect());
        }
    }
    let backend = ProbeBackend::Radial(*setup);
    Ok(LemmaId::BOUNDARY
        .iter()
        .zip(&per_lemma)
        .map(|(&lemma, ratios)| ProbeReport::assemble(lemma, s, l, &backend, samples.len(), gaps, ratios))
        .collect())
}

/// Random fields on a grid: `N`, `M` weighted for `H^l`, `u`, `v`, `w` for `s`.
pub struct GridSample {
    pub n: SpectralField,
    pub m: SpectralField,
    pub u: SpectralField,
    pub v: SpectralField,
    pub w: SpectralField,
}

impl GridSample {
    /// Coefficients `z_ξ Σ_b a_b w_b(ξ)` with `z_ξ` uniform in the unit square
    /// and per-band amplitudes `a_b` set by the profile; `N` and `M` real.
    pub fn draw(cfg: &DyadicConfig, seed: u64, profile: Profile, s: f64, l: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = |sigma: f64, real: bool| {
            let f = random_field(cfg, profile, sigma, &mut rng);
            if real {
                f.real_part()
            } else {
                f
            }
        };
        let n = field(l, true);
        let m = field(l, true);
        let u = field(s, false);
        let v = field(s, false);
        let w = field(s, false);
        Self { n, m, u, v, w }
    }
}

fn random_field(cfg: &DyadicConfig, profile: Profile, sigma: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let grid = *cfg.grid();
    let table = cfg.table();
    let d = grid.dim() as f64;
    let nb = table.bands.len();
    let shell = |b: usize| match table.bands[b] {
        crate::dyadic::Band::Head => cfg.k_min() - 1,
        crate::dyadic::Band::Shell(k) => k,
    };
    let amps: Vec<f64> = match profile {
        Profile::Zero => vec![0.0; nb],
        Profile::Flat => (0..nb)
            .map(|b| rng.gen_range(0.2..1.0) * 2f64.powf(-0.5 * d * shell(b) as f64))
            .collect(),
        Profile::Critical => (0..nb)
            .map(|b| rng.gen_range(0.2..1.0) * 2f64.powf(-(0.5 * d + sigma) * shell(b) as f64))
            .collect(),
        Profile::SingleShell => {
            let pick = rng.gen_range(0..nb);
            (0..nb).map(|b| if b == pick { 1.0 } else { 0.0 }).collect()
        }
    };
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    let z: Vec<Complex64> = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    for (b, sup) in table.support.iter().enumerate() {
        if amps[b] == 0.0 {
            continue;
        }
        for &(i, wgt) in sup {
            c[i] += z[i] * (amps[b] * wgt);
        }
    }
    SpectralField::from_coeffs(grid, c).expect("grid-sized coefficients")
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && den.is_finite()).then(|| num / den)
}

/// Left/right ratio of one estimate for one sample; `None` for a vanishing
/// right-hand side.
pub fn grid_ratio(lemma: LemmaId, x: &GridSample, s: f64, l: f64, cfg: &DyadicConfig) -> Result<Option<f64>> {
    let floor = default_floor(cfg.alpha());
    let b = |f: &SpectralField, sig: f64, p: f64| -> Result<f64> {
        besov_norm(f, &BesovSpec::new(sig, p, 2.0, false)?, cfg)
    };
    let hs = sobolev_norm;
    Ok(match lemma {
        LemmaId::QuadLh | LemmaId::QuadHh => {
            let den = hs(&x.n, l) * b(&x.u, s, 4.0)?;
            if !(den > 0.0) {
                return Ok(None);
            }
            let kinds: &[Interaction] = if lemma == LemmaId::QuadLh {
                &[Interaction::LH, Interaction::AlphaL]
            } else {
                &[Interaction::HH]
            };
            ratio(b(&paraproduct_sum(&x.n, &x.u, kinds, cfg)?, s, 4.0 / 3.0)?, den)
        }
        LemmaId::QuadWave => {
            let den = b(&x.u, s, 4.0)? * b(&x.v, s, 4.0)?;
            if !(den > 0.0) {
                return Ok(None);
            }
            let hh = paraproduct_sum(&x.u, &x.v, &[Interaction::HH], cfg)?.d();
            let al = paraproduct_sum(&x.u, &x.v, &[Interaction::AlphaL, Interaction::LAlpha], cfg)?.d();
            ratio(hs(&hh, l) + hs(&al, l), den)
        }
        LemmaId::Boundary1 => {
            let den = hs(&x.n, l) * hs(&x.u, s);
            if !(den > 0.0) {
                return Ok(None);
            }
            ratio(hs(&omega(&x.n, &x.u, cfg, floor)?, s), den)
        }
        LemmaId::Boundary2 => {
            let den = hs(&x.u, s) * hs(&x.v, s);
            if !(den > 0.0) {
                return Ok(None);
            }
            ratio(hs(&d_omega_tilde(&x.u, &x.v, cfg, floor)?, l), den)
        }
        LemmaId::Boundary3 => {
            let den = hs(&x.n, l) * b(&x.u, s, 4.0)?;
            if !(den > 0.0) {
                return Ok(None);
            }
            ratio(b(&omega(&x.n, &x.u, cfg, floor)?, s, 4.0)?, den)
        }
        LemmaId::Boundary4 => {
            let den = b(&x.u, s, 4.0)? * hs(&x.v, s) + b(&x.v, s, 4.0)? * hs(&x.u, s);
            if !(den > 0.0) {
                return Ok(None);
            }
            let ot = super::omega_tilde(&x.u, &x.v, cfg, floor)?.bracket(l);
            let spec = BesovSpec::new(1.0 / 6.0, 6.0, 2.0, true)?;
            ratio(besov_norm(&ot, &spec, cfg)?, den)
        }
        LemmaId::Cubic1 => {
            let den = (hs(&x.u, s) * b(&x.v, 0.5, 4.0)? + hs(&x.v, s) * b(&x.u, 0.5, 4.0)?)
                * b(&x.w, 0.5, 4.0)?;
            if !(den > 0.0) {
                return Ok(None);
            }
            let duv = x.u.product(&x.v)?.d();
            ratio(hs(&omega(&duv, &x.w, cfg, floor)?, s), den)
        }
        LemmaId::Cubic2 => {
            let den = hs(&x.m, l) * hs(&x.n, l) * b(&x.u, s, 4.0)?;
            if !(den > 0.0) {
                return Ok(None);
            }
            let nu = x.n.product(&x.u)?;
            ratio(b(&omega(&x.m, &nu, cfg, floor)?, s, 4.0 / 3.0)?, den)
        }
        LemmaId::Cubic3 => {
            let den = hs(&x.n, l) * b(&x.u, s, 4.0)? * b(&x.v, s, 4.0)?;
            if !(den > 0.0) {
                return Ok(None);
            }
            let nu = x.n.product(&x.u)?;
            let a = hs(&d_omega_tilde(&nu, &x.v, cfg, floor)?, l);
            let c = hs(&d_omega_tilde(&x.v, &nu, cfg, floor)?, l);
            ratio(a + c, den)
        }
    })
}
