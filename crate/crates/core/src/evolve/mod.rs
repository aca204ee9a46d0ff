//! Time stepping for `(i∂t + D²)u = Nu`, `(i∂t + αD)N = αD|u|²` and the
//! Picard iteration on the normal-form integral equations.

mod picard;

pub use picard::{duhamel_residual, picard_apply, picard_solve, PicardOptions, PicardWorkspace};

use crate::error::{Result, ZakError};
use crate::grid::{SpectralField, ZakharovState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Sup norm beyond which a run counts as blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Nonlinearity of the Schrödinger equation: `Re N · u` or `N · u`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    #[default]
    Physical,
    Analytic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    StrangSplit,
    LawsonRk2,
}

impl Scheme {
    pub fn id(self) -> &'static str {
        match self {
            Scheme::StrangSplit => "strang-split",
            Scheme::LawsonRk2 => "lawson-rk2",
        }
    }
}

/// Coupled system or the cubic Schrödinger limit `(i∂t + D²)u = |u|²u`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    #[default]
    Zakharov,
    CubicNls,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    pub scheme: Scheme,
    pub mode: Nonlinearity,
    pub model: Model,
    /// `false` drops every nonlinear term (free flow).
    pub coupling: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::StrangSplit,
            mode: Nonlinearity::Physical,
            model: Model::Zakharov,
            coupling: true,
        }
    }
}

impl StepOptions {
    pub fn new(scheme: Scheme, mode: Nonlinearity) -> Self {
        Self {
            scheme,
            mode,
            ..Self::default()
        }
    }

    pub fn nls(scheme: Scheme) -> Self {
        Self {
            scheme,
            model: Model::CubicNls,
            ..Self::default()
        }
    }

    pub fn uncoupled(mut self) -> Self {
        self.coupling = false;
        self
    }
}

/// `(f_u, f_N)` with `f_u = Re N·u` or `N·u` and `f_N = αD|u|²`, dealiased.
pub fn nonlinear_rhs(
    state: &ZakharovState,
    mode: Nonlinearity,
) -> Result<(SpectralField, SpectralField)> {
    let potential = match mode {
        Nonlinearity::Physical => state.wave.real_part(),
        Nonlinearity::Analytic => state.wave.clone(),
    };
    let fu = potential.product(&state.u)?;
    let fn_ = state.u.abs_sq().d().scale_real(state.alpha);
    Ok((fu, fn_))
}

fn nls_rhs(u: &SpectralField) -> Result<SpectralField> {
    u.abs_sq().product(u)
}

fn linear(state: &ZakharovState, dt: f64, opts: &StepOptions) -> Result<(SpectralField, SpectralField)> {
    let u = state.u.apply_s(dt);
    let n = match opts.model {
        Model::Zakharov => state.wave.apply_w(state.alpha, dt)?,
        Model::CubicNls => state.wave.clone(),
    };
    Ok((u, n))
}

/// Multiplies physical samples of `u` by `e^{-iτV}`.
fn phase(u: &SpectralField, potential: &[Complex64], tau: f64) -> Result<SpectralField> {
    let mut x = u.to_physical();
    let mi = Complex64::new(0.0, -tau);
    for (v, p) in x.iter_mut().zip(potential) {
        *v *= (mi * p).exp();
    }
    SpectralField::from_physical(*u.grid(), &x)
}

fn source_kick(n: &SpectralField, u: &SpectralField, alpha: f64, tau: f64) -> SpectralField {
    let mut out = n.clone();
    out.axpy(Complex64::new(0.0, -tau * alpha), &u.abs_sq().d());
    out
}

/// Nonlinear flow over `τ`: half kick of the `N` source, pointwise phase for
/// `u` with the kicked potential, half kick again. In physical mode the kicks
/// are imaginary, so `Re N` and `|u|` are untouched and the substep is exact.
fn nonlinear_flow(
    u: &SpectralField,
    n: &SpectralField,
    alpha: f64,
    tau: f64,
    opts: &StepOptions,
) -> Result<(SpectralField, SpectralField)> {
    match opts.model {
        Model::CubicNls => {
            let pot: Vec<Complex64> = u
                .to_physical()
                .iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0))
                .collect();
            Ok((phase(u, &pot, tau)?, n.clone()))
        }
        Model::Zakharov => {
            let half = source_kick(n, u, alpha, 0.5 * tau);
            let pot: Vec<Complex64> = match opts.mode {
                Nonlinearity::Physical => half
                    .to_physical()
                    .iter()
                    .map(|v| Complex64::new(v.re, 0.0))
                    .collect(),
                Nonlinearity::Analytic => half.to_physical(),
            };
            let u1 = phase(u, &pot, tau)?;
            let n1 = source_kick(&half, &u1, alpha, 0.5 * tau);
            Ok((u1, n1))
        }
    }
}

/// `(-i f_u, -i f_N)` for the chosen model.
fn full_rhs(
    u: &SpectralField,
    n: &SpectralField,
    alpha: f64,
    opts: &StepOptions,
) -> Result<(SpectralField, SpectralField)> {
    let mi = Complex64::new(0.0, -1.0);
    match opts.model {
        Model::CubicNls => Ok((nls_rhs(u)?.scale(mi), SpectralField::zeros(*u.grid()))),
        Model::Zakharov => {
            let s = ZakharovState {
                u: u.clone(),
                wave: n.clone(),
                t: 0.0,
                alpha,
            };
            let (fu, fn_) = nonlinear_rhs(&s, opts.mode)?;
            Ok((fu.scale(mi), fn_.scale(mi)))
        }
    }
}

fn lawson_rk2(state: &ZakharovState, dt: f64, opts: &StepOptions) -> Result<(SpectralField, SpectralField)> {
    let a = state.alpha;
    let (k1u, k1n) = full_rhs(&state.u, &state.wave, a, opts)?;
    let mut pu = state.u.clone();
    pu.axpy(Complex64::new(dt, 0.0), &k1u);
    let mut pn = state.wave.clone();
    pn.axpy(Complex64::new(dt, 0.0), &k1n);
    let pred = ZakharovState { u: pu, wave: pn, ..state.clone() };
    let (pu, pn) = linear(&pred, dt, opts)?;
    let (k2u, k2n) = full_rhs(&pu, &pn, a, opts)?;
    let mut bu = state.u.clone();
    bu.axpy(Complex64::new(0.5 * dt, 0.0), &k1u);
    let mut bn = state.wave.clone();
    bn.axpy(Complex64::new(0.5 * dt, 0.0), &k1n);
    let base = ZakharovState { u: bu, wave: bn, ..state.clone() };
    let (mut u, mut n) = linear(&base, dt, opts)?;
    u.axpy(Complex64::new(0.5 * dt, 0.0), &k2u);
    n.axpy(Complex64::new(0.5 * dt, 0.0), &k2n);
    Ok((u, n))
}

fn strang(state: &ZakharovState, dt: f64, opts: &StepOptions) -> Result<(SpectralField, SpectralField)> {
    let (u, n) = linear(state, 0.5 * dt, opts)?;
    let (u, n) = nonlinear_flow(&u, &n, state.alpha, dt, opts)?;
    let mid = ZakharovState { u, wave: n, ..state.clone() };
    linear(&mid, 0.5 * dt, opts)
}

/// One step of size `dt` (negative steps run backward in time).
pub fn step(state: &ZakharovState, dt: f64, opts: &StepOptions) -> Result<ZakharovState> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(ZakError::InvalidParameter(format!(
            "time step must be finite and nonzero, got {dt}"
        )));
    }
    let (u, wave) = if !opts.coupling {
        linear(state, dt, opts)?
    } else {
        match opts.scheme {
            Scheme::StrangSplit => strang(state, dt, opts)?,
            Scheme::LawsonRk2 => lawson_rk2(state, dt, opts)?,
        }
    };
    let next = ZakharovState {
        u,
        wave,
        t: state.t + dt,
        alpha: state.alpha,
    };
    let sup = next.sup_norm();
    if !sup.is_finite() || sup > BLOW_UP_THRESHOLD {
        return Err(ZakError::BlowUp {
            t: next.t,
            last_valid: state.t,
        });
    }
    Ok(next)
}

/// Snapshots at uniform stride from a fixed-step run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<ZakharovState>,
    pub dt: f64,
    pub stride: usize,
    pub integrator: String,
    pub fingerprint: Option<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &ZakharovState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn with_fingerprint(mut self, fp: impl Into<String>) -> Self {
        self.fingerprint = Some(fp.into());
        self
    }
}

/// Number of steps of size `dt` from `t0` to `t_end`; the span must be a
/// whole number of steps.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    let span = t_end - t0;
    if !(dt.is_finite() && dt != 0.0) || !(span.is_finite()) || span * dt <= 0.0 {
        return Err(ZakError::InvalidParameter(format!(
            "t_end - t0 = {span} must be nonzero with the sign of dt = {dt}"
        )));
    }
    let steps = (span / dt).round();
    if (steps * dt - span).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(ZakError::InvalidParameter(format!(
            "span {span} is not a whole number of steps of {dt}"
        )));
    }
    Ok(steps as usize)
}

/// Runs from `initial.t` to `t_end`, keeping every `stride`-th state and
/// handing each kept state to `observer` as soon as it exists.
pub fn simulate_with(
    initial: &ZakharovState,
    dt: f64,
    t_end: f64,
    opts: &StepOptions,
    stride: usize,
    observer: &mut dyn FnMut(&ZakharovState) -> Result<()>,
) -> Result<Trajectory> {
    if stride == 0 {
        return Err(ZakError::InvalidParameter("snapshot stride must be positive".into()));
    }
    let steps = step_count(initial.t, t_end, dt)?;
    let t0 = initial.t;
    observer(initial)?;
    let mut states = vec![initial.clone()];
    let mut cur = initial.clone();
    for k in 1..=steps {
        cur = step(&cur, dt, opts)?;
        // keep times on the exact lattice t0 + k dt
        cur.t = t0 + k as f64 * dt;
        if k % stride == 0 || k == steps {
            observer(&cur)?;
            states.push(cur.clone());
        }
    }
    Ok(Trajectory {
        states,
        dt,
        stride,
        integrator: opts.scheme.id().to_string(),
        fingerprint: None,
    })
}

pub fn simulate(
    initial: &ZakharovState,
    dt: f64,
    t_end: f64,
    opts: &StepOptions,
    stride: usize,
) -> Result<Trajectory> {
    simulate_with(initial, dt, t_end, opts, stride, &mut |_| Ok(()))
}

/// Maximum over snapshot pairs of `‖u-u'‖_{H^s} + ‖N-N'‖_{H^l}`.
pub fn trajectory_distance(a: &[ZakharovState], b: &[ZakharovState], s: f64, l: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ZakError::InvalidParameter(format!(
            "trajectories have {} and {} snapshots",
            a.len(),
            b.len()
        )));
    }
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        x.u.same_grid(&y.u)?;
        let d = crate::dyadic::sobolev_norm(&(&x.u - &y.u), s)
            + crate::dyadic::sobolev_norm(&(&x.wave - &y.wave), l);
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{rel_err, Grid};
    use std::f64::consts::PI;

    pub(crate) fn smooth_state(g: Grid, amp: f64, alpha: f64) -> ZakharovState {
        let u = SpectralField::from_fn(g, |x| {
            let r2 = (x[0] - PI).powi(2) + (x[1] - PI).powi(2);
            Complex64::new((-r2).exp(), 0.3 * (x[0] - PI) * (-r2).exp()) * amp
        });
        let n = SpectralField::from_fn(g, |x| {
            Complex64::new(0.5 * (x[1]).cos() + 0.2 * (x[0] + x[1]).sin(), 0.1 * x[0].sin()) * amp
        });
        ZakharovState::new(u, n, 0.0, alpha).unwrap()
    }

    #[test]
    fn rhs_trivial_cases() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let z = ZakharovState::zero(g, 1.0).unwrap();
        let (a, b) = nonlinear_rhs(&z, Nonlinearity::Physical).unwrap();
        assert!(a.is_zero() && b.is_zero());
        let mut s = smooth_state(g, 1.0, 2.0);
        s.wave = s.wave.real_part();
        let (p, pn) = nonlinear_rhs(&s, Nonlinearity::Physical).unwrap();
        let (q, qn) = nonlinear_rhs(&s, Nonlinearity::Analytic).unwrap();
        assert!(rel_err(&p, &q) < 1e-14);
        assert_eq!(pn, qn);
        assert_eq!(pn.coeffs()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn uncoupled_step_is_the_propagator() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let s = smooth_state(g, 1.0, 1.5);
        for scheme in [Scheme::StrangSplit, Scheme::LawsonRk2] {
            let o = StepOptions::new(scheme, Nonlinearity::Physical).uncoupled();
            let t = step(&s, 0.01, &o).unwrap();
            assert!(rel_err(&t.u, &s.u.apply_s(0.01)) < 1e-13);
            assert!(rel_err(&t.wave, &s.wave.apply_w(1.5, 0.01).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn strang_step_keeps_mass() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let s = smooth_state(g, 0.5, 1.0);
        let t = step(&s, 1e-2, &StepOptions::default()).unwrap();
        let (m0, m1) = (s.u.coeff_energy(), t.u.coeff_energy());
        assert!(((m1 - m0) / m0).abs() < 1e-13);
    }

    #[test]
    fn second_order_self_convergence() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let s = smooth_state(g, 0.3, 1.0);
        for scheme in [Scheme::StrangSplit, Scheme::LawsonRk2] {
            for mode in [Nonlinearity::Physical, Nonlinearity::Analytic] {
                let o = StepOptions::new(scheme, mode);
                let run = |dt: f64| simulate(&s, dt, 0.5, &o, usize::MAX).unwrap().last().clone();
                let r = run(0.05 / 16.0);
                let e: Vec<f64> = [0.05, 0.025, 0.0125]
                    .iter()
                    .map(|&dt| {
                        let x = run(dt);
                        crate::normal_form::pair_norm(&(&x.u - &r.u), &(&x.wave - &r.wave))
                    })
                    .collect();
                for w in e.windows(2) {
                    let q = w[0] / w[1];
                    assert!(q > 3.5 && q < 4.6, "{scheme:?} {mode:?} {e:?}");
                }
            }
        }
    }

    #[test]
    fn blow_up_is_reported_with_last_valid_time() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let mut s = ZakharovState::zero(g, 1.0).unwrap();
        s.u = SpectralField::from_fn(g, |_| Complex64::new(1e7, 0.0));
        s.wave = SpectralField::from_fn(g, |x| Complex64::new(0.0, -x[0].cos()));
        // analytic mode with Im N > 0 somewhere amplifies |u|
        let o = StepOptions::new(Scheme::StrangSplit, Nonlinearity::Analytic);
        match simulate(&s, 1.0, 100.0, &o, 1) {
            Err(ZakError::BlowUp { t, last_valid }) => assert!(t > last_valid),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn step_count_rules() {
        assert_eq!(step_count(0.0, 1.0, 1e-3).unwrap(), 1000);
        assert_eq!(step_count(1.0, 0.0, -1e-3).unwrap(), 1000);
        assert!(step_count(0.0, 1.0, -1e-3).is_err());
        assert!(step_count(0.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn time_reversal() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let s = smooth_state(g, 0.3, 1.0);
        let o = StepOptions::default();
        let f = simulate(&s, 0.01, 1.0, &o, 100).unwrap();
        let b = simulate(f.last(), -0.01, 0.0, &o, 100).unwrap();
        let back = b.last();
        assert!(rel_err(&back.u, &s.u) < 1e-4);
        assert!(rel_err(&back.wave, &s.wave) < 1e-4);
        assert!(back.t.abs() < 1e-12);
    }
}
