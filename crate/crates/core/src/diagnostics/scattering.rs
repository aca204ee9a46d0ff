use crate::dyadic::sobolev_norm;
use crate::error::{Result, ZakError};
use crate::evolve::{simulate, Model, StepOptions, Trajectory};
use crate::grid::{SpectralField, ZakharovState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const TORUS_CAVEAT: &str =
    "periodic box: dispersion saturates once waves wrap around, so pullback decay is qualitative";

/// Difference of consecutive pullbacks `S(-t)u(t)`, `W(-t)N(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub t0: f64,
    pub t1: f64,
    pub du: f64,
    pub dn: f64,
    /// `(du + dn) / (t1 - t0)`.
    pub rate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub table: Vec<CauchyRow>,
    #[serde(skip)]
    pub u_plus: Option<SpectralField>,
    #[serde(skip)]
    pub n_plus: Option<SpectralField>,
    /// First gap rate over last gap rate.
    pub decay_factor: f64,
    /// `decay_factor ≥ 2`.
    pub decaying: bool,
    pub caveat: String,
}

/// Pullback Cauchy table over the snapshots with `t ≥ t_min`.
pub fn scattering_profile(traj: &Trajectory, s: f64, l: f64, t_min: f64) -> Result<ScatteringReport> {
    let late: Vec<&ZakharovState> = traj.states.iter().filter(|st| st.t >= t_min).collect();
    if late.len() < 10 {
        return Err(ZakError::InvalidParameter(format!(
            "scattering table needs at least 10 snapshots past t = {t_min}, got {}",
            late.len()
        )));
    }
    let pulled = late
        .par_iter()
        .map(|st| Ok((st.t, st.u.apply_s(-st.t), st.wave.apply_w(st.alpha, -st.t)?)))
        .collect::<Result<Vec<_>>>()?;
    let table: Vec<CauchyRow> = pulled
        .windows(2)
        .map(|w| {
            let du = sobolev_norm(&(&w[1].1 - &w[0].1), s);
            let dn = sobolev_norm(&(&w[1].2 - &w[0].2), l);
            CauchyRow {
                t0: w[0].0,
                t1: w[1].0,
                du,
                dn,
                rate: (du + dn) / (w[1].0 - w[0].0),
            }
        })
        .collect();
    let first = table.first().map(|r| r.rate).unwrap_or(0.0);
    let last = table.last().map(|r| r.rate).unwrap_or(0.0);
    let decay_factor = if last > 0.0 {
        first / last
    } else if first > 0.0 {
        f64::MAX
    } else {
        1.0
    };
    let (_, u, n) = pulled.into_iter().last().expect("at least ten snapshots");
    Ok(ScatteringReport {
        table,
        u_plus: Some(u),
        n_plus: Some(n),
        decay_factor,
        decaying: decay_factor >= 2.0,
        caveat: TORUS_CAVEAT.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsonicRow {
    pub alpha: f64,
    /// `‖u_α(t★) - u_NLS(t★)‖_{L²}`.
    pub error: f64,
}

/// Zakharov runs from `(u₀, N₀ = |u₀|²)` for each `α` against the cubic
/// Schrödinger run from `u₀`, all with the same step and scheme.
pub fn subsonic_compare(
    u0: &SpectralField,
    alphas: &[f64],
    t_star: f64,
    dt: f64,
    opts: &StepOptions,
) -> Result<Vec<SubsonicRow>> {
    let n0 = u0.abs_sq().real_part();
    let nls_opts = StepOptions {
        model: Model::CubicNls,
        ..*opts
    };
    let start = ZakharovState::new(u0.clone(), n0.clone(), 0.0, 1.0)?;
    let reference = simulate(&start, dt, t_star, &nls_opts, usize::MAX)?;
    let r = &reference.last().u;
    let zak_opts = StepOptions {
        model: Model::Zakharov,
        ..*opts
    };
    alphas
        .par_iter()
        .map(|&alpha| {
            let st = ZakharovState::new(u0.clone(), n0.clone(), 0.0, alpha)?;
            let run = simulate(&st, dt, t_star, &zak_opts, usize::MAX)?;
            Ok(SubsonicRow {
                alpha,
                error: (&run.last().u - r).l2_norm(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{Nonlinearity, Scheme};
    use crate::grid::Grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn bump(g: Grid, amp: f64) -> SpectralField {
        SpectralField::from_fn(g, |x| {
            let r2 = (x[0] - PI).powi(2) + (x[1] - PI).powi(2);
            Complex64::new((-r2).exp() * amp, 0.0)
        })
    }

    #[test]
    fn free_pullbacks_are_constant() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let s = ZakharovState::new(bump(g, 1.0), bump(g, 0.5), 0.0, 1.0).unwrap();
        let o = StepOptions::default().uncoupled();
        let tr = simulate(&s, 0.1, 3.0, &o, 1).unwrap();
        let rep = scattering_profile(&tr, 0.5, 0.0, 1.0).unwrap();
        assert!(rep.table.iter().all(|r| r.du <= 1e-13 && r.dn <= 1e-13));
        let z = ZakharovState::zero(g, 1.0).unwrap();
        let tr = simulate(&z, 0.1, 3.0, &StepOptions::default(), 1).unwrap();
        let rep = scattering_profile(&tr, 0.5, 0.0, 1.0).unwrap();
        assert!(rep.table.iter().all(|r| r.du == 0.0 && r.dn == 0.0));
        assert!(!rep.decaying);
    }

    #[test]
    fn subsonic_trivial_cases() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let o = StepOptions::new(Scheme::StrangSplit, Nonlinearity::Physical);
        let rows = subsonic_compare(&SpectralField::zeros(g), &[2.0, 4.0], 0.1, 0.01, &o).unwrap();
        assert!(rows.iter().all(|r| r.error == 0.0));
        let rows = subsonic_compare(&bump(g, 0.5), &[2.0, 4.0], 0.1, 0.01, &o.uncoupled()).unwrap();
        assert!(rows.iter().all(|r| r.error <= 1e-13));
    }
}
