//! C ABI for the `zakharov` crate.
//!
//! Every function returns a [`ZakStatus`]; on failure the message is kept per
//! thread and read with [`zak_last_error`]. Handles are opaque and owned by the
//! caller, who releases them with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use zakharov::cli::{parse_config, run_in, RunStatus};
use zakharov::diagnostics::{energy, mass};
use zakharov::dyadic::DyadicConfig;
use zakharov::evolve::{simulate, Nonlinearity, Scheme, StepOptions};
use zakharov::normal_form::{default_floor, psi_forward, psi_inverse};
use zakharov::{Complex64, Grid, ZakError, ZakharovState};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZakStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Resonance = 4,
    Diverged = 5,
    BlowUp = 6,
    Unattainable = 7,
    Io = 8,
    Panic = 9,
    BufferTooSmall = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZakScheme {
    StrangSplit = 0,
    LawsonRk2 = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZakNonlinearity {
    /// `Re N · u`
    Physical = 0,
    /// `N · u`
    Analytic = 1,
}

/// Periodic grid `[0, L)^d` with `n` points per axis.
pub struct ZakGrid(Grid);

/// Pair `(u, N)` at a time `t`.
pub struct ZakState(ZakharovState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &ZakError) -> ZakStatus {
    match e {
        ZakError::Config(_) => ZakStatus::Config,
        ZakError::Resonance { .. } => ZakStatus::Resonance,
        ZakError::Diverged { .. } => ZakStatus::Diverged,
        ZakError::BlowUp { .. } => ZakStatus::BlowUp,
        ZakError::Unattainable { .. } => ZakStatus::Unattainable,
        ZakError::Io(_) | ZakError::Json(_) | ZakError::Checkpoint(_) => ZakStatus::Io,
        _ => ZakStatus::InvalidArgument,
    }
}

struct Fail(ZakStatus, String);

impl From<ZakError> for Fail {
    fn from(e: ZakError) -> Self {
        Fail(code_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ZakStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ZakStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZakStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ZakStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ZakStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn check_len(grid: &Grid, len: usize) -> Result<(), Fail> {
    if len != grid.len() {
        return Err(Fail(
            ZakStatus::InvalidArgument,
            format!("buffer length {len} does not match grid size {}", grid.len()),
        ));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zak_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full length including the NUL, or 0 when
/// no message is pending. A successful `zak_run_config` that stopped on a
/// finding leaves the finding's message here.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zak_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && cap > 0 {
                let n = bytes.len().min(cap);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn zak_grid_new(dim: usize, n: usize, length: f64, out: *mut *mut ZakGrid) -> ZakStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = Grid::new(dim, n, length)?;
        *out = Box::into_raw(Box::new(ZakGrid(g)));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle from [`zak_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zak_grid_free(grid: *mut ZakGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of grid points `n^d`, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zak_grid_len(grid: *const ZakGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Builds a state at `t = 0` from physical samples of `u = u_re + i u_im`,
/// the density `n0` and its time derivative `n1` (mean zero). All arrays hold
/// `len = n^d` values in row-major order.
///
/// # Safety
/// Pointers must be valid for `len` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zak_state_from_physical(
    grid: *const ZakGrid,
    alpha: f64,
    u_re: *const f64,
    u_im: *const f64,
    n0: *const f64,
    n1: *const f64,
    len: usize,
    out: *mut *mut ZakState,
) -> ZakStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null("grid"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        check_len(&g, len)?;
        let (re, im) = (slice(u_re, len, "u_re")?, slice(u_im, len, "u_im")?);
        let u: Vec<Complex64> = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let s = ZakharovState::from_physical(g, &u, slice(n0, len, "n0")?, slice(n1, len, "n1")?, alpha)?;
        *out = Box::into_raw(Box::new(ZakState(s)));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zak_state_free(state: *mut ZakState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Writes the physical fields of `state` into caller buffers of length `len`.
///
/// # Safety
/// `state` must be live; buffers must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn zak_state_read(
    state: *const ZakState,
    u_re: *mut f64,
    u_im: *mut f64,
    n0: *mut f64,
    n1: *mut f64,
    len: usize,
) -> ZakStatus {
    guard(|| {
        let s = &state.as_ref().ok_or_else(|| null("state"))?.0;
        if len != s.grid().len() {
            return Err(Fail(
                ZakStatus::BufferTooSmall,
                format!("buffer length {len} does not match grid size {}", s.grid().len()),
            ));
        }
        let (re, im) = (slice_mut(u_re, len, "u_re")?, slice_mut(u_im, len, "u_im")?);
        for (i, c) in s.u.to_physical().into_iter().enumerate() {
            re[i] = c.re;
            im[i] = c.im;
        }
        let (a, b) = s.densities();
        slice_mut(n0, len, "n0")?.copy_from_slice(&a);
        slice_mut(n1, len, "n1")?.copy_from_slice(&b);
        Ok(())
    })
}

/// Current time, mass `‖u‖²` and energy of `state`; null outputs are skipped.
///
/// # Safety
/// `state` must be live; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn zak_state_invariants(
    state: *const ZakState,
    t: *mut f64,
    mass_out: *mut f64,
    energy_out: *mut f64,
) -> ZakStatus {
    guard(|| {
        let s = &state.as_ref().ok_or_else(|| null("state"))?.0;
        if !t.is_null() {
            *t = s.t;
        }
        if !mass_out.is_null() {
            *mass_out = mass(&s.u);
        }
        if !energy_out.is_null() {
            *energy_out = energy(s);
        }
        Ok(())
    })
}

/// Advances `state` in place to `t_end` with steps `dt`; `t_end - t` must be
/// a whole number of steps. On failure the state is left unchanged.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn zak_state_evolve(
    state: *mut ZakState,
    dt: f64,
    t_end: f64,
    scheme: ZakScheme,
    mode: ZakNonlinearity,
) -> ZakStatus {
    guard(|| {
        let s = &mut state.as_mut().ok_or_else(|| null("state"))?.0;
        let scheme = match scheme {
            ZakScheme::StrangSplit => Scheme::StrangSplit,
            ZakScheme::LawsonRk2 => Scheme::LawsonRk2,
        };
        let mode = match mode {
            ZakNonlinearity::Physical => Nonlinearity::Physical,
            ZakNonlinearity::Analytic => Nonlinearity::Analytic,
        };
        let traj = simulate(s, dt, t_end, &StepOptions::new(scheme, mode), usize::MAX)?;
        *s = traj.last().clone();
        Ok(())
    })
}

/// Applies the normal-form map with frequency gap `gap` (at least 5), or its
/// inverse when `inverse` is nonzero, writing a new state to `out`.
///
/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zak_state_normal_form(
    state: *const ZakState,
    gap: u32,
    inverse: i32,
    out: *mut *mut ZakState,
) -> ZakStatus {
    guard(|| {
        let s = &state.as_ref().ok_or_else(|| null("state"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = DyadicConfig::new(s.grid(), gap, s.alpha)?;
        let floor = default_floor(s.alpha);
        let (u, n) = if inverse != 0 {
            let (u, n, _) = psi_inverse(&s.u, &s.wave, &cfg, floor, 1e-12, 60)?;
            (u, n)
        } else {
            psi_forward(s, &cfg, floor)?
        };
        let r = ZakharovState::new(u, n, s.t, s.alpha)?;
        *out = Box::into_raw(Box::new(ZakState(r)));
        Ok(())
    })
}

/// Runs the experiment described by the TOML text `config` into `outdir`
/// (null: the configured or default location). `exit_code` receives the
/// command-line exit code: 0 on success, 1 when the run stopped on a finding
/// written to `error.json`.
///
/// # Safety
/// `config` must be a NUL-terminated string, `outdir` null or one, and
/// `exit_code` null or writable.
#[no_mangle]
pub unsafe extern "C" fn zak_run_config(config: *const c_char, outdir: *const c_char, exit_code: *mut i32) -> ZakStatus {
    guard(|| {
        let text = text(config, "config")?;
        let cfg = parse_config(text, &[], None).map_err(|e| Fail(ZakStatus::Config, e.to_string()))?;
        let dir = if outdir.is_null() {
            cfg.outdir()
        } else {
            text_owned(outdir)?
        };
        let o = run_in(&cfg, &dir)?;
        if !exit_code.is_null() {
            *exit_code = o.exit_code();
        }
        if o.status == RunStatus::Finding {
            let msg = o.summary["message"].as_str().unwrap_or("finding").to_string();
            set_error(msg);
        }
        Ok(())
    })
}

unsafe fn text_owned(p: *const c_char) -> Result<String, Fail> {
    text(p, "outdir").map(str::to_string)
}
