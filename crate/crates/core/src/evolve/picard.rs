use super::Trajectory;
use crate::dyadic::{paraproduct_sum, sobolev_norm, DyadicConfig, Interaction};
use crate::error::{Result, ZakError};
use crate::grid::{SpectralField, ZakharovState};
use crate::normal_form::{d_omega_tilde, default_floor, omega, ContractionReport};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub t_end: f64,
    /// Number of time intervals `M`.
    pub nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub floor: f64,
    /// Iterate differences are measured in `L^∞_t(H^s × H^l)`.
    pub s: f64,
    pub l: f64,
}

impl PicardOptions {
    pub fn new(t_end: f64, nodes: usize, alpha: f64) -> Self {
        Self {
            t_end,
            nodes,
            tol: 1e-12,
            max_iter: 60,
            floor: default_floor(alpha),
            s: 0.5,
            l: 0.0,
        }
    }
}

/// Current iterate sampled on `0 = t_0 < … < t_M = T`.
#[derive(Clone, Debug)]
pub struct PicardWorkspace {
    pub times: Vec<f64>,
    pub u: Vec<SpectralField>,
    pub n: Vec<SpectralField>,
    pub iteration: usize,
    pub history: Vec<f64>,
    pub s: f64,
    pub l: f64,
}

impl PicardWorkspace {
    /// The zero iterate on a uniform time grid.
    pub fn zero(cfg: &DyadicConfig, opts: &PicardOptions) -> Result<Self> {
        check_memory(cfg, opts)?;
        let g = *cfg.grid();
        let m = opts.nodes;
        let times = (0..=m).map(|i| opts.t_end * i as f64 / m as f64).collect();
        Ok(Self {
            times,
            u: vec![SpectralField::zeros(g); m + 1],
            n: vec![SpectralField::zeros(g); m + 1],
            iteration: 0,
            history: Vec::new(),
            s: opts.s,
            l: opts.l,
        })
    }

    /// `sup_m ‖u_m - u'_m‖_{H^s} + ‖N_m - N'_m‖_{H^l}`.
    pub fn distance(&self, other: &PicardWorkspace) -> f64 {
        self.u
            .iter()
            .zip(&self.n)
            .zip(other.u.iter().zip(&other.n))
            .map(|((a, b), (c, d))| sobolev_norm(&(a - c), self.s) + sobolev_norm(&(b - d), self.l))
            .fold(0.0, f64::max)
    }

    pub fn to_trajectory(&self, alpha: f64) -> Result<Trajectory> {
        let states = self
            .times
            .iter()
            .zip(self.u.iter().zip(&self.n))
            .map(|(t, (u, n))| ZakharovState::new(u.clone(), n.clone(), *t, alpha))
            .collect::<Result<Vec<_>>>()?;
        let dt = self.times.get(1).copied().unwrap_or(0.0);
        Ok(Trajectory {
            states,
            dt,
            stride: 1,
            integrator: "picard".into(),
            fingerprint: None,
        })
    }
}

fn check_memory(cfg: &DyadicConfig, opts: &PicardOptions) -> Result<()> {
    let g = cfg.grid();
    let mut errs = Vec::new();
    if !(opts.t_end.is_finite() && opts.t_end > 0.0) {
        errs.push(format!("picard T must be positive, got {}", opts.t_end));
    }
    if opts.nodes == 0 {
        errs.push("picard M must be at least 1".into());
    }
    if g.dim() > 2 && g.n() > 16 {
        errs.push(format!(
            "picard stores M+1 full fields: allowed for d <= 2, or d = 3, 4 with n <= 16 (got d = {}, n = {})",
            g.dim(),
            g.n()
        ));
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(ZakError::Config(errs))
    }
}

struct NodeTerms {
    omega: SpectralField,
    d_omega_t: SpectralField,
    g: SpectralField,
    h: SpectralField,
}

/// Boundary corrections and Duhamel integrands at one node.
fn node_terms(
    u: &SpectralField,
    n: &SpectralField,
    cfg: &DyadicConfig,
    floor: f64,
) -> Result<NodeTerms> {
    let alpha = cfg.alpha();
    let grid = *cfg.grid();
    if u.is_zero() && n.is_zero() {
        let z = SpectralField::zeros(grid);
        return Ok(NodeTerms {
            omega: z.clone(),
            d_omega_t: z.clone(),
            g: z.clone(),
            h: z,
        });
    }
    let nu = n.product(u)?;
    let src = u.abs_sq().d().scale_real(alpha);
    let mut g = omega(&src, u, cfg, floor)?;
    g += &omega(n, &nu, cfg, floor)?;
    g += &paraproduct_sum(n, u, &[Interaction::LH, Interaction::HH, Interaction::AlphaL], cfg)?;
    let ubar = u.conj();
    let mut h = paraproduct_sum(
        u,
        &ubar,
        &[Interaction::HH, Interaction::AlphaL, Interaction::LAlpha],
        cfg,
    )?
    .d()
    .scale_real(alpha);
    h += &d_omega_tilde(&nu, u, cfg, floor)?;
    h -= &d_omega_tilde(u, &nu, cfg, floor)?;
    Ok(NodeTerms {
        omega: omega(n, u, cfg, floor)?,
        d_omega_t: d_omega_tilde(u, u, cfg, floor)?,
        g,
        h,
    })
}

/// One application of `Φ_{u₀,N₀}`:
///
/// `u'(t) = S(t)(u₀ + Ω(N₀,u₀)) - Ω(N,u)(t) - i∫₀ᵗ S(t-s) G ds`,
/// `N'(t) = W(t)(N₀ + DΩ̃(u₀,u₀)) - DΩ̃(u,u)(t) - i∫₀ᵗ W(t-s) H ds`,
///
/// with `G = Ω(αD|u|², u) + Ω(N, Nu) + (Nu)_{LH+HH+αL}` and
/// `H = αD(uū)_{HH+αL+Lα} + DΩ̃(Nu, u) - DΩ̃(u, Nu)`. The integrals use the
/// composite trapezoid rule on `S(-s)G(s)`, `W(-s)H(s)` with exact propagators.
pub fn picard_apply(
    w: &PicardWorkspace,
    u0: &SpectralField,
    n0: &SpectralField,
    cfg: &DyadicConfig,
    floor: f64,
) -> Result<PicardWorkspace> {
    cfg.check_grid(u0)?;
    cfg.check_grid(n0)?;
    let alpha = cfg.alpha();
    let bu = u0 + &omega(n0, u0, cfg, floor)?;
    let bn = n0 + &d_omega_tilde(u0, u0, cfg, floor)?;
    let terms: Vec<NodeTerms> = w
        .u
        .par_iter()
        .zip(w.n.par_iter())
        .map(|(u, n)| node_terms(u, n, cfg, floor))
        .collect::<Result<_>>()?;
    let grid = *cfg.grid();
    let mi = Complex64::new(0.0, -1.0);
    let mut acc_u = SpectralField::zeros(grid);
    let mut acc_n = SpectralField::zeros(grid);
    let mut prev: Option<(SpectralField, SpectralField)> = None;
    let mut out_u = Vec::with_capacity(terms.len());
    let mut out_n = Vec::with_capacity(terms.len());
    for (i, (t, nt)) in w.times.iter().zip(&terms).enumerate() {
        let pu = nt.g.apply_s(-t);
        let pn = nt.h.apply_w(alpha, -t)?;
        if let Some((qu, qn)) = &prev {
            let h = 0.5 * (t - w.times[i - 1]);
            acc_u.axpy(Complex64::new(h, 0.0), qu);
            acc_u.axpy(Complex64::new(h, 0.0), &pu);
            acc_n.axpy(Complex64::new(h, 0.0), qn);
            acc_n.axpy(Complex64::new(h, 0.0), &pn);
        }
        let mut u = &bu + &acc_u.scale(mi);
        u = u.apply_s(*t);
        u -= &nt.omega;
        let mut n = (&bn + &acc_n.scale(mi)).apply_w(alpha, *t)?;
        n -= &nt.d_omega_t;
        out_u.push(u);
        out_n.push(n);
        prev = Some((pu, pn));
    }
    let mut next = PicardWorkspace {
        times: w.times.clone(),
        u: out_u,
        n: out_n,
        iteration: w.iteration + 1,
        history: w.history.clone(),
        s: w.s,
        l: w.l,
    };
    let d = next.distance(w);
    next.history.push(d);
    Ok(next)
}

/// Iterates [`picard_apply`] from the zero iterate until the sup-in-time
/// difference drops below `tol`.
pub fn picard_solve(
    u0: &SpectralField,
    n0: &SpectralField,
    cfg: &DyadicConfig,
    opts: &PicardOptions,
) -> Result<(Trajectory, ContractionReport)> {
    let mut w = PicardWorkspace::zero(cfg, opts)?;
    let mut report = ContractionReport::default();
    for _ in 0..opts.max_iter.max(1) {
        w = picard_apply(&w, u0, n0, cfg, opts.floor)?;
        let diff = *w.history.last().expect("one entry per iteration");
        if !diff.is_finite() || diff > super::BLOW_UP_THRESHOLD {
            return Err(report.diverged());
        }
        report.push(diff);
        if diff <= opts.tol {
            report.finish();
            return Ok((w.to_trajectory(cfg.alpha())?, report));
        }
        if report.stalled() {
            return Err(report.diverged());
        }
    }
    Err(report.diverged())
}

/// Relative residual of the analytic-mode system on a sampled trajectory:
/// centred differences of the pullbacks `S(-t)u`, `W(-t)N` against
/// `-i S(-t)(Nu)`, `-i W(-t) αD|u|²` at interior nodes.
pub fn duhamel_residual(traj: &Trajectory) -> Result<f64> {
    let st = &traj.states;
    if st.len() < 3 {
        return Err(ZakError::InvalidParameter(
            "residual needs at least three snapshots".into(),
        ));
    }
    let alpha = st[0].alpha;
    let pull = |s: &ZakharovState| -> Result<(SpectralField, SpectralField)> {
        Ok((s.u.apply_s(-s.t), s.wave.apply_w(alpha, -s.t)?))
    };
    let pulled = st.iter().map(pull).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 1..st.len() - 1 {
        let h = st[i + 1].t - st[i - 1].t;
        let s = &st[i];
        let fu = s.wave.product(&s.u)?.apply_s(-s.t);
        let fnn = s.u.abs_sq().d().scale_real(alpha).apply_w(alpha, -s.t)?;
        let mut ru = (&pulled[i + 1].0 - &pulled[i - 1].0).scale_real(1.0 / h);
        ru.axpy(Complex64::new(0.0, 1.0), &fu);
        let mut rn = (&pulled[i + 1].1 - &pulled[i - 1].1).scale_real(1.0 / h);
        rn.axpy(Complex64::new(0.0, 1.0), &fnn);
        worst = worst.max(ru.l2_norm() + rn.l2_norm());
        scale = scale.max(fu.l2_norm() + fnn.l2_norm());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{rel_err, Grid};
    use std::f64::consts::PI;

    fn data(g: Grid, amp: f64) -> (SpectralField, SpectralField) {
        let u = SpectralField::from_fn(g, |x| {
            Complex64::new(x[0].cos() + 0.5 * (x[0] + 2.0 * x[1]).sin(), 0.4 * x[1].cos()) * amp
        });
        let n = SpectralField::from_fn(g, |x| Complex64::new((2.0 * x[1]).cos(), 0.3 * x[0].sin()) * amp);
        (u, n)
    }

    #[test]
    fn zero_iterate_gives_free_plus_boundary() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let cfg = DyadicConfig::new(&g, 5, 1.0).unwrap();
        let opts = PicardOptions::new(0.5, 8, 1.0);
        let (u0, n0) = data(g, 0.1);
        let w = PicardWorkspace::zero(&cfg, &opts).unwrap();
        let w1 = picard_apply(&w, &u0, &n0, &cfg, opts.floor).unwrap();
        let bu = &u0 + &omega(&n0, &u0, &cfg, opts.floor).unwrap();
        for (t, u) in w1.times.iter().zip(&w1.u) {
            assert!(rel_err(u, &bu.apply_s(*t)) < 1e-14);
        }
        assert_eq!(w1.iteration, 1);
        assert_eq!(w1.history.len(), 1);
    }

    #[test]
    fn zero_data_converges_in_one_iteration() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let cfg = DyadicConfig::new(&g, 5, 1.0).unwrap();
        let z = SpectralField::zeros(g);
        let (tr, rep) = picard_solve(&z, &z, &cfg, &PicardOptions::new(0.5, 8, 1.0)).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(tr.states.iter().all(|s| s.u.is_zero() && s.wave.is_zero()));
    }

    #[test]
    fn memory_rule() {
        let g = Grid::new(3, 32, 2.0 * PI).unwrap();
        let cfg = DyadicConfig::new(&g, 5, 1.0).unwrap();
        assert!(matches!(
            PicardWorkspace::zero(&cfg, &PicardOptions::new(0.5, 8, 1.0)),
            Err(ZakError::Config(_))
        ));
    }

    #[test]
    fn converged_iterate_is_fixed() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let cfg = DyadicConfig::new(&g, 5, 1.0).unwrap();
        let (u0, n0) = data(g, 0.05);
        let opts = PicardOptions::new(0.25, 16, 1.0);
        let (tr, rep) = picard_solve(&u0, &n0, &cfg, &opts).unwrap();
        assert!(rep.observed_ratio < 0.5, "{rep:?}");
        let w = PicardWorkspace {
            times: tr.times(),
            u: tr.states.iter().map(|s| s.u.clone()).collect(),
            n: tr.states.iter().map(|s| s.wave.clone()).collect(),
            iteration: 0,
            history: vec![],
            s: 0.5,
            l: 0.0,
        };
        let w2 = picard_apply(&w, &u0, &n0, &cfg, opts.floor).unwrap();
        assert!(w2.history[0] <= 10.0 * opts.tol, "{}", w2.history[0]);
    }
}
