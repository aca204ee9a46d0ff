use super::config::{DataCfg, DataKind, RunConfig};
use crate::error::Result;
use crate::grid::{Grid, SpectralField, ZakharovState};
use crate::normal_form::pair_norm;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid_of(cfg: &RunConfig) -> Result<Grid> {
    Grid::new(cfg.grid.d, cfg.grid.n, cfg.grid.length)
}

fn bump(g: Grid, width: f64) -> impl Fn(&[f64]) -> f64 {
    let c = 0.5 * g.length();
    move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| (v - c).powi(2)).sum();
        (-r2 / width).exp()
    }
}

/// Smooth random field with Gaussian spectral envelope `e^{-w²|ξ|²/4}`,
/// scaled to root-mean-square amplitude `amp`.
fn random_field(g: Grid, width: f64, amp: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let xi2 = g.xi_sq();
    let c: Vec<Complex64> = xi2
        .iter()
        .map(|q| {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            z * (-0.25 * width * width * q).exp()
        })
        .collect();
    let f = SpectralField::from_coeffs(g, c).expect("grid-sized coefficients");
    let rms = f.l2_norm() / g.volume().sqrt();
    if rms > 0.0 {
        f.scale_real(amp / rms)
    } else {
        f
    }
}

/// `(u₀, N₀)` described by `data`, with `N₀` real.
pub fn initial_fields(g: Grid, data: &DataCfg, seed: u64) -> (SpectralField, SpectralField) {
    let (u, n) = match data.kind {
        DataKind::Zero => (SpectralField::zeros(g), SpectralField::zeros(g)),
        DataKind::Gaussian => {
            let b = bump(g, data.width);
            let c = 0.5 * g.length();
            let (a, w) = (data.amplitude, data.wave_amplitude);
            let u = SpectralField::from_fn(g, |x| {
                let e = b(x);
                Complex64::new(a * e, 0.3 * a * (x[0] - c) * e)
            });
            let n = SpectralField::from_fn(g, |x| Complex64::new(w * b(x), 0.0));
            (u, n)
        }
        DataKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_field(g, data.width, data.amplitude, &mut rng);
            let n = random_field(g, data.width, data.wave_amplitude, &mut rng).real_part();
            (u, n)
        }
    };
    match data.size {
        Some(s) => {
            let now = pair_norm(&u, &n);
            if now > 0.0 {
                (u.scale_real(s / now), n.scale_real(s / now))
            } else {
                (u, n)
            }
        }
        None => (u, n),
    }
}

pub fn initial_state(cfg: &RunConfig) -> Result<ZakharovState> {
    let g = grid_of(cfg)?;
    let (u, n) = initial_fields(g, &cfg.data, cfg.seed);
    ZakharovState::new(u, n, 0.0, cfg.alpha)
}
