//! Conserved quantities, Strichartz-type accumulators, small-interval
//! splitting, pullback (scattering) tables and the subsonic comparison.

mod intervals;
mod scattering;

pub use intervals::{split_small_intervals, sum_space_norm, Partition};
pub use scattering::{
    scattering_profile, subsonic_compare, CauchyRow, ScatteringReport, SubsonicRow,
};

use crate::dyadic::{besov_norm, sobolev_norm, BesovSpec, DyadicConfig};
use crate::error::Result;
use crate::grid::{SpectralField, ZakharovState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// `∫|u|² dx`.
pub fn mass(u: &SpectralField) -> f64 {
    u.coeff_energy() / u.grid().volume()
}

/// `∫ Re N |u|² dx` (exact for the band-limited product).
pub fn interaction(state: &ZakharovState) -> f64 {
    state.wave.real_part().inner(&state.u.abs_sq()).re
}

/// `‖∇u‖²`.
pub fn gradient_energy(u: &SpectralField) -> f64 {
    let q = u.grid().xi_sq();
    let e: f64 = u.coeffs().iter().zip(&q).map(|(c, w)| w * c.norm_sqr()).sum();
    e / u.grid().volume()
}

/// `E_Z = ∫|∇u|² + |N|²/2 - Re N|u|² dx`.
pub fn energy(state: &ZakharovState) -> f64 {
    gradient_energy(&state.u) + 0.5 * mass(&state.wave) - interaction(state)
}

/// Which norms a diagnostics row carries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSpec {
    /// `H^s` norms of `u`.
    pub s_list: Vec<f64>,
    /// `H^l` norms of `N`.
    pub l_list: Vec<f64>,
    /// Regularity of the `L²_t B^s_{4,2}` accumulator for `u`.
    pub strichartz_s: f64,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self {
            s_list: vec![0.5, 1.0],
            l_list: vec![0.0],
            strichartz_s: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub interaction: f64,
    pub hs_u: Vec<f64>,
    pub hl_n: Vec<f64>,
    /// `‖u‖_{L²(0,t; B^s_{4,2})}` so far.
    pub strichartz_u: f64,
    /// `‖N‖_{L²(0,t; Ḃ^{-5/6}_{6,2})}` so far.
    pub strichartz_n: f64,
}

/// Per-snapshot quantities before time accumulation.
#[derive(Clone, Debug)]
struct Snapshot {
    t: f64,
    mass: f64,
    energy: f64,
    interaction: f64,
    hs_u: Vec<f64>,
    hl_n: Vec<f64>,
    b4_u: f64,
    b6_n: f64,
}

/// Streams rows in time order; the Strichartz columns are trapezoid
/// integrals of the squared per-snapshot norms.
pub struct Diagnostics {
    spec: DiagnosticsSpec,
    cfg: DyadicConfig,
    b4: BesovSpec,
    b6: BesovSpec,
    last: Option<(f64, f64, f64)>,
    acc_u: f64,
    acc_n: f64,
}

impl Diagnostics {
    pub fn new(spec: DiagnosticsSpec, cfg: DyadicConfig) -> Result<Self> {
        let b4 = BesovSpec::new(spec.strichartz_s, 4.0, 2.0, false)?;
        let b6 = BesovSpec::new(-5.0 / 6.0, 6.0, 2.0, true)?;
        Ok(Self {
            spec,
            cfg,
            b4,
            b6,
            last: None,
            acc_u: 0.0,
            acc_n: 0.0,
        })
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["t", "mass", "energy", "interaction"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(self.spec.s_list.iter().map(|s| format!("u_H{s}")));
        h.extend(self.spec.l_list.iter().map(|l| format!("N_H{l}")));
        h.push(format!("u_L2B4_{}", self.spec.strichartz_s));
        h.push("N_L2B6_-5/6".into());
        h
    }

    fn snapshot(&self, s: &ZakharovState) -> Result<Snapshot> {
        Ok(Snapshot {
            t: s.t,
            mass: mass(&s.u),
            energy: energy(s),
            interaction: interaction(s),
            hs_u: self.spec.s_list.iter().map(|&x| sobolev_norm(&s.u, x)).collect(),
            hl_n: self.spec.l_list.iter().map(|&x| sobolev_norm(&s.wave, x)).collect(),
            b4_u: besov_norm(&s.u, &self.b4, &self.cfg)?,
            b6_n: besov_norm(&s.wave, &self.b6, &self.cfg)?,
        })
    }

    fn accumulate(&mut self, p: Snapshot) -> DiagnosticsRow {
        let (bu, bn) = (p.b4_u.powi(2), p.b6_n.powi(2));
        if let Some((t0, u0, n0)) = self.last {
            let h = 0.5 * (p.t - t0).abs();
            self.acc_u += h * (u0 + bu);
            self.acc_n += h * (n0 + bn);
        }
        self.last = Some((p.t, bu, bn));
        DiagnosticsRow {
            t: p.t,
            mass: p.mass,
            energy: p.energy,
            interaction: p.interaction,
            hs_u: p.hs_u,
            hl_n: p.hl_n,
            strichartz_u: self.acc_u.sqrt(),
            strichartz_n: self.acc_n.sqrt(),
        }
    }

    /// Next row; states must arrive in time order.
    pub fn observe(&mut self, s: &ZakharovState) -> Result<DiagnosticsRow> {
        let p = self.snapshot(s)?;
        Ok(self.accumulate(p))
    }

    /// Rows for a whole trajectory; snapshots are evaluated in parallel.
    pub fn rows(&mut self, states: &[ZakharovState]) -> Result<Vec<DiagnosticsRow>> {
        let snaps: Vec<Snapshot> = states
            .par_iter()
            .map(|s| self.snapshot(s))
            .collect::<Result<_>>()?;
        Ok(snaps.into_iter().map(|p| self.accumulate(p)).collect())
    }
}

pub fn row_fields(r: &DiagnosticsRow) -> Vec<f64> {
    let mut v = vec![r.t, r.mass, r.energy, r.interaction];
    v.extend(&r.hs_u);
    v.extend(&r.hl_n);
    v.push(r.strichartz_u);
    v.push(r.strichartz_n);
    v
}

/// Writes one CSV line; floats use the shortest round-trip form.
pub fn write_csv_row<W: Write>(w: &mut W, fields: &[f64]) -> std::io::Result<()> {
    let line: Vec<String> = fields.iter().map(|x| format!("{x:e}")).collect();
    writeln!(w, "{}", line.join(","))
}

/// Mass and energy drift of a row sequence against its first row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationSummary {
    pub mass_drift_rel: f64,
    pub energy_drift_abs: f64,
    pub energy_drift_rel: f64,
}

pub fn conservation(rows: &[DiagnosticsRow]) -> ConservationSummary {
    let Some(first) = rows.first() else {
        return ConservationSummary::default();
    };
    let dm = rows.iter().map(|r| (r.mass - first.mass).abs()).fold(0.0, f64::max);
    let de = rows
        .iter()
        .map(|r| (r.energy - first.energy).abs())
        .fold(0.0, f64::max);
    let rel = |d: f64, base: f64| if base != 0.0 { d / base.abs() } else { d };
    ConservationSummary {
        mass_drift_rel: rel(dm, first.mass),
        energy_drift_abs: de,
        energy_drift_rel: rel(de, first.energy),
    }
}
