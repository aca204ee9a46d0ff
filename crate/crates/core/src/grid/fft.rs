use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized in-place d-dimensional FFT over a row-major cube of side `n`.
///
/// Forward uses `e^{-2πi jk/n}`, inverse `e^{+2πi jk/n}`; neither scales.
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    transform(data, n, dim, inverse, None);
}

/// As [`fft_nd`] for data supported on the index set `live^dim`: the inverse
/// skips lines that are still zero, the forward skips lines whose outputs
/// leave `live^dim`. Forward outputs outside `live^dim` are left unspecified.
pub(crate) fn fft_nd_pruned(data: &mut [Complex64], n: usize, dim: usize, inverse: bool, live: &[bool]) {
    transform(data, n, dim, inverse, Some(live));
}

/// Whether every base-`n` digit of `x` (the lowest `digits` of them) is live.
fn all_live(mut x: usize, n: usize, digits: usize, live: &[bool]) -> bool {
    for _ in 0..digits {
        if !live[x % n] {
            return false;
        }
        x /= n;
    }
    true
}

fn transform(data: &mut [Complex64], n: usize, dim: usize, inverse: bool, live: Option<&[bool]>) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let dir = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir));
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let total = data.len();
    let mut buf = Vec::new();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        // lines inside a block are indexed by the later axes; blocks by the earlier ones
        let lines: Vec<usize> = match live {
            Some(l) if inverse => (0..stride).filter(|&o| all_live(o, n, dim - 1 - axis, l)).collect(),
            _ => (0..stride).collect(),
        };
        buf.resize(lines.len() * n, Complex64::new(0.0, 0.0));
        for (b, start) in (0..total).step_by(block).enumerate() {
            if let Some(l) = live {
                if !inverse && !all_live(b, n, axis, l) {
                    continue;
                }
            }
            let chunk = &mut data[start..start + block];
            if stride == 1 {
                plan.process_with_scratch(chunk, &mut scratch);
                continue;
            }
            // gather: line o becomes contiguous
            for (q, &o) in lines.iter().enumerate() {
                for j in 0..n {
                    buf[q * n + j] = chunk[j * stride + o];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for (q, &o) in lines.iter().enumerate() {
                for j in 0..n {
                    chunk[j * stride + o] = buf[q * n + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct(data: &[Complex64], n: usize, dim: usize, sign: f64) -> Vec<Complex64> {
        let len = data.len();
        let idx = |mut f: usize| {
            let mut v = vec![0usize; dim];
            for a in (0..dim).rev() {
                v[a] = f % n;
                f /= n;
            }
            v
        };
        (0..len)
            .map(|k| {
                let kv = idx(k);
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, x) in data.iter().enumerate() {
                    let jv = idx(j);
                    let ph: usize = kv.iter().zip(&jv).map(|(a, b)| a * b).sum();
                    let ang = sign * 2.0 * PI * (ph % n) as f64 / n as f64;
                    acc += x * Complex64::from_polar(1.0, ang);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        for &(n, dim) in &[(8usize, 1usize), (8, 2), (8, 3)] {
            let len = n.pow(dim as u32);
            let data: Vec<Complex64> = (0..len)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut a = data.clone();
            fft_nd(&mut a, n, dim, false);
            let b = direct(&data, n, dim, -1.0);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-10);
            }
            let mut c = data.clone();
            fft_nd(&mut c, n, dim, true);
            let e = direct(&data, n, dim, 1.0);
            for (x, y) in c.iter().zip(&e) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pruned_matches_full_on_embedded_support() {
        let (n, dim) = (8usize, 3usize);
        let live: Vec<bool> = (0..n).map(|i| i < 2 || i >= 6).collect();
        let len = n.pow(dim as u32);
        let on = |f: usize| all_live(f, n, dim, &live);
        let data: Vec<Complex64> = (0..len)
            .map(|i| if on(i) { Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let mut full = data.clone();
        fft_nd(&mut full, n, dim, true);
        let mut pruned = data.clone();
        fft_nd_pruned(&mut pruned, n, dim, true, &live);
        assert_eq!(full, pruned);
        let mut f2 = full.clone();
        fft_nd(&mut f2, n, dim, false);
        let mut p2 = full;
        fft_nd_pruned(&mut p2, n, dim, false, &live);
        for i in (0..len).filter(|&i| on(i)) {
            assert_eq!(f2[i], p2[i]);
        }
    }
}
