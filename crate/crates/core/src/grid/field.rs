use super::{fft_nd, fft_nd_pruned, Grid};
use crate::error::{Result, ZakError};
use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex scalar field stored by its Fourier coefficients on a [`Grid`].
///
/// Coefficients are kept in FFT storage order, row-major with the last
/// axis fastest. Arithmetic operators panic on grid mismatch; the public
/// entry points that combine user supplied fields check grids first.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(ZakError::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of physical samples.
    pub fn from_physical(grid: Grid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(ZakError::LengthMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut c = samples.to_vec();
        fft_nd(&mut c, grid.n(), grid.dim(), false);
        let w = grid.cell();
        c.iter_mut().for_each(|v| *v *= w);
        Ok(Self { grid, coeffs: c })
    }

    pub fn from_real(grid: Grid, samples: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_physical(grid, &c)
    }

    /// Samples `f` at the grid nodes and transforms.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let s: Vec<Complex64> = (0..grid.len())
            .map(|i| f(&grid.point(i)[..grid.dim()]))
            .collect();
        Self::from_physical(grid, &s).expect("length matches by construction")
    }

    /// Field whose coefficient at each lattice point is `f(ξ)`.
    pub fn from_symbol(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let coeffs = (0..grid.len())
            .map(|i| f(&grid.xi(i)[..grid.dim()]))
            .collect();
        Self { grid, coeffs }
    }

    /// Inverse transform to physical samples.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut c = self.coeffs.clone();
        fft_nd(&mut c, self.grid.n(), self.grid.dim(), true);
        let w = 1.0 / self.grid.volume();
        c.iter_mut().for_each(|v| *v *= w);
        c
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(ZakError::GridMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Coefficientwise product with `symbol(ξ)`.
    pub fn apply_multiplier(&self, symbol: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let d = self.grid.dim();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                out.push(ZERO);
                continue;
            }
            let xi = self.grid.xi(i);
            let s = symbol(&xi[..d]);
            if !(s.re.is_finite() && s.im.is_finite()) {
                return Err(ZakError::NonFiniteSymbol { index: i });
            }
            out.push(c * s);
        }
        Ok(Self {
            grid: self.grid,
            coeffs: out,
        })
    }

    /// Multiplier depending only on `|ξ|`, evaluated from exact lattice norms.
    pub fn apply_radial(&self, symbol: impl Fn(f64) -> Complex64) -> Result<Self> {
        let norms = self.grid.xi_abs();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                out.push(ZERO);
                continue;
            }
            let s = symbol(norms[i]);
            if !(s.re.is_finite() && s.im.is_finite()) {
                return Err(ZakError::NonFiniteSymbol { index: i });
            }
            out.push(c * s);
        }
        Ok(Self {
            grid: self.grid,
            coeffs: out,
        })
    }

    /// Real radial multiplier; never fails because callers pass finite weights.
    pub(crate) fn scale_radial_table(&self, table: &[f64]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(table)
            .map(|(c, w)| if *w == 0.0 { ZERO } else { c * w })
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `S(t)`: multiply by `e^{it|ξ|²}`.
    pub fn apply_s(&self, t: f64) -> Self {
        if t == 0.0 {
            return self.clone();
        }
        let xi2 = self.grid.xi_sq();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&xi2)
            .map(|(c, q)| c * Complex64::from_polar(1.0, t * q))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `W_α(t)`: multiply by `e^{iαt|ξ|}`.
    pub fn apply_w(&self, alpha: f64, t: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ZakError::InvalidAlpha(alpha));
        }
        if t == 0.0 {
            return Ok(self.clone());
        }
        let xa = self.grid.xi_abs();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&xa)
            .map(|(c, r)| c * Complex64::from_polar(1.0, alpha * t * r))
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }

    /// `D = |∇|`.
    pub fn d(&self) -> Self {
        self.scale_radial_table(&self.grid.xi_abs())
    }

    /// `D^{-1}` with the zero mode mapped to zero.
    pub fn d_inv(&self) -> Self {
        let t: Vec<f64> = self
            .grid
            .xi_abs()
            .into_iter()
            .map(|r| if r == 0.0 { 0.0 } else { 1.0 / r })
            .collect();
        self.scale_radial_table(&t)
    }

    /// `⟨D⟩^s`, i.e. the multiplier `(1+|ξ|²)^{s/2}`.
    pub fn bracket(&self, s: f64) -> Self {
        let t: Vec<f64> = self
            .grid
            .xi_sq()
            .into_iter()
            .map(|q| (1.0 + q).powf(0.5 * s))
            .collect();
        self.scale_radial_table(&t)
    }

    /// Coefficients of the complex conjugate field: `conj(f̂(-m))`.
    pub fn conj(&self) -> Self {
        let coeffs = (0..self.coeffs.len())
            .map(|i| self.coeffs[self.grid.neg_index(i)].conj())
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `(f + f̄)/2`.
    pub fn real_part(&self) -> Self {
        let c = self.conj();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&c.coeffs)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `(f - f̄)/(2i)`.
    pub fn imag_part(&self) -> Self {
        let c = self.conj();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&c.coeffs)
            .map(|(a, b)| (a - b) * Complex64::new(0.0, -0.5))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: Complex64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    /// `Σ |f̂|²`, the raw coefficient energy.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Physical `L²` norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.coeff_energy() / self.grid.volume()).sqrt()
    }

    /// Physical `L²` inner product `∫ f ḡ`.
    pub fn inner(&self, other: &SpectralField) -> Complex64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        s / self.grid.volume()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Exact product `fg` truncated to the base lattice (computed on a
    /// twice-padded grid, so no aliasing enters).
    pub fn product(&self, other: &SpectralField) -> Result<Self> {
        self.same_grid(other)?;
        let pad = Padder::new(self.grid);
        let a = pad.to_physical(self);
        let mut b = pad.to_physical(other);
        b.iter_mut().zip(&a).for_each(|(x, y)| *x *= y);
        Ok(pad.from_physical(b))
    }

    /// `|f|²`, dealiased.
    pub fn abs_sq(&self) -> Self {
        let pad = Padder::new(self.grid);
        let a = pad.to_physical(self);
        let b: Vec<Complex64> = a.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
        pad.from_physical(b)
    }

    /// Coefficient at a signed mode vector, zero if not representable.
    pub fn at_mode(&self, m: &[i64]) -> Complex64 {
        self.grid
            .flat_of_modes(m)
            .map(|f| self.coeffs[f])
            .unwrap_or(ZERO)
    }

    /// Field shifted by whole lattice cells: `f(x - h·s)`.
    pub fn translate_cells(&self, shift: &[i64]) -> Self {
        let n = self.grid.n() as i64;
        let coeffs = (0..self.coeffs.len())
            .map(|i| {
                let m = self.grid.modes(i);
                let mut ph = 0i64;
                for a in 0..self.grid.dim() {
                    ph += m[a] * shift.get(a).copied().unwrap_or(0);
                }
                let ang = -2.0 * std::f64::consts::PI * (ph.rem_euclid(n)) as f64 / n as f64;
                self.coeffs[i] * Complex64::from_polar(1.0, ang)
            })
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }
}

/// Maps base fields to samples on the twice-padded grid and back.
pub(crate) struct Padder {
    base: Grid,
    padded: Grid,
    embed: Vec<usize>,
    /// Padded indices per axis that carry a base mode.
    live: Vec<bool>,
}

impl Padder {
    pub(crate) fn new(base: Grid) -> Self {
        let padded = base.padded();
        let half = (base.n() / 2) as i64;
        let live = (0..padded.n())
            .map(|i| (-half..half).contains(&padded.mode(i)))
            .collect();
        Self {
            base,
            padded,
            embed: base.embedding(),
            live,
        }
    }

    pub(crate) fn padded_len(&self) -> usize {
        self.padded.len()
    }

    /// Physical samples of `f` on the padded grid.
    pub(crate) fn to_physical(&self, f: &SpectralField) -> Vec<Complex64> {
        debug_assert_eq!(*f.grid(), self.base);
        let mut buf = vec![ZERO; self.padded.len()];
        for (c, &e) in f.coeffs.iter().zip(&self.embed) {
            buf[e] = *c;
        }
        fft_nd_pruned(&mut buf, self.padded.n(), self.padded.dim(), true, &self.live);
        let w = 1.0 / self.padded.volume();
        buf.iter_mut().for_each(|v| *v *= w);
        buf
    }

    /// Forward transform of padded samples, truncated to the base lattice.
    pub(crate) fn from_physical(&self, mut buf: Vec<Complex64>) -> SpectralField {
        fft_nd_pruned(&mut buf, self.padded.n(), self.padded.dim(), false, &self.live);
        let w = self.padded.cell();
        let coeffs = self.embed.iter().map(|&e| buf[e] * w).collect();
        SpectralField {
            grid: self.base,
            coeffs,
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for SpectralField {
    type Output = SpectralField;
    fn add(mut self, rhs: SpectralField) -> SpectralField {
        self += &rhs;
        self
    }
}

impl Sub for SpectralField {
    type Output = SpectralField;
    fn sub(mut self, rhs: SpectralField) -> SpectralField {
        self -= &rhs;
        self
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *x += y;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *x -= y;
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale_real(-1.0)
    }
}

impl Mul<Complex64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: Complex64) -> SpectralField {
        self.scale(rhs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale_real(rhs)
    }
}

/// Relative coefficient-space distance.
pub fn rel_err(a: &SpectralField, b: &SpectralField) -> f64 {
    let diff = (a - b).coeff_energy().sqrt();
    let scale = a.coeff_energy().sqrt().max(b.coeff_energy().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
