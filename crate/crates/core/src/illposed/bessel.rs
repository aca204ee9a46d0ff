//! Bessel functions of the first kind, orders 0, 1, 2, on `x ≥ 0`.
//!
//! Power series below `SERIES_MAX`, Miller's backward recurrence up to
//! `ASYMPTOTIC_MIN`, Hankel's asymptotic expansion beyond.

use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_MAX: f64 = 6.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// `(J0, J1, J2)` at `x`; negative `x` is reflected with the parity of each order.
pub fn bessel_j012(x: f64) -> (f64, f64, f64) {
    if x < 0.0 {
        let (a, b, c) = bessel_j012(-x);
        return (a, -b, c);
    }
    if x <= SERIES_MAX {
        (series(0, x), series(1, x), series(2, x))
    } else if x < ASYMPTOTIC_MIN {
        miller(x)
    } else {
        let j0 = hankel(0, x);
        let j1 = hankel(1, x);
        (j0, j1, 2.0 * j1 / x - j0)
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_MAX {
        series(0, x)
    } else if x < ASYMPTOTIC_MIN {
        miller(x).0
    } else {
        hankel(0, x)
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    let v = if x <= SERIES_MAX {
        series(1, x)
    } else if x < ASYMPTOTIC_MIN {
        miller(x).1
    } else {
        hankel(1, x)
    };
    if x == 0.0 {
        0.0
    } else {
        s * v
    }
}

/// `Σ_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)`.
fn series(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= h / i as f64;
    }
    let q = -h * h;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized by `J0 + 2 Σ J_{2k} = 1`.
fn miller(x: f64) -> (f64, f64, f64) {
    let start = 2 * ((x as usize + 60) / 2);
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let (mut j0, mut j1, mut j2) = (0.0, 0.0, 0.0);
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds the unnormalized J_{k-1}.
        let order = k - 1;
        match order {
            0 => j0 = cur,
            1 => j1 = cur,
            2 => j2 = cur,
            _ => {}
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
            j2 *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm, j2 / norm)
}

/// Hankel's expansion `sqrt(2/(πx)) (P cos χ - Q sin χ)`, `χ = x - (n/2 + 1/4)π`.
fn hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60u32 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * z);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * n as f64) * PI - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
