use crate::dyadic::{lp_norm, project_le, DyadicConfig};
use crate::error::{Result, ZakError};
use crate::grid::SpectralField;
use serde::{Deserialize, Serialize};

/// `0 = T_0 < … < T_{n+1} = T` with the winning cut per subinterval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub bounds: Vec<f64>,
    /// `Some(k)`: `P_{≤k}N` went to `L^∞L²`; `None`: all of `N` in `L²L⁴`.
    pub cuts: Vec<Option<i32>>,
    pub values: Vec<f64>,
}

/// Per-sample `‖P_{≤k}N‖_{L²}` and `‖(1-P_{≤k})N‖_{L⁴}` for every cut.
struct CutTable {
    cuts: Vec<Option<i32>>,
    low: Vec<Vec<f64>>,
    high: Vec<Vec<f64>>,
}

impl CutTable {
    fn new(samples: &[SpectralField], cfg: &DyadicConfig) -> Result<Self> {
        let mut cuts = vec![None];
        cuts.extend((cfg.k_min() - 1..=cfg.k_max()).map(Some));
        let mut low = Vec::with_capacity(cuts.len());
        let mut high = Vec::with_capacity(cuts.len());
        for c in &cuts {
            let mut l = Vec::with_capacity(samples.len());
            let mut h = Vec::with_capacity(samples.len());
            for n in samples {
                match c {
                    None => {
                        l.push(0.0);
                        h.push(lp_norm(n, 4.0));
                    }
                    Some(k) => {
                        let p = project_le(n, *k, cfg)?;
                        l.push(p.l2_norm());
                        h.push(lp_norm(&(n - &p), 4.0));
                    }
                }
            }
            low.push(l);
            high.push(h);
        }
        Ok(Self { cuts, low, high })
    }
}

fn check_times(times: &[f64], samples: &[SpectralField]) -> Result<()> {
    if times.len() != samples.len() || times.len() < 2 {
        return Err(ZakError::InvalidParameter(format!(
            "need at least two samples with matching times ({} times, {} samples)",
            times.len(),
            samples.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ZakError::InvalidParameter("sample times must increase".into()));
    }
    Ok(())
}

/// `min_k sup ‖P_{≤k}N‖_{L²} + (∫‖(1-P_{≤k})N‖_{L⁴}² dt)^{1/2}` over the
/// samples `a..=b`, time integral by the trapezoid rule.
fn interval_norm(t: &CutTable, times: &[f64], a: usize, b: usize) -> (f64, Option<i32>) {
    let mut best = (f64::INFINITY, None);
    for (c, cut) in t.cuts.iter().enumerate() {
        let sup = t.low[c][a..=b].iter().copied().fold(0.0, f64::max);
        let int: f64 = (a..b)
            .map(|i| 0.5 * (times[i + 1] - times[i]) * (t.high[c][i].powi(2) + t.high[c][i + 1].powi(2)))
            .sum();
        let v = sup + int.sqrt();
        if v < best.0 {
            best = (v, *cut);
        }
    }
    best
}

/// Measured `L^∞_t L² + L²_t L⁴` norm of the whole sample.
pub fn sum_space_norm(times: &[f64], samples: &[SpectralField], cfg: &DyadicConfig) -> Result<f64> {
    check_times(times, samples)?;
    let t = CutTable::new(samples, cfg)?;
    Ok(interval_norm(&t, times, 0, times.len() - 1).0)
}

/// Greedy partition of the sampled interval into pieces of sum-space norm below `eps`.
pub fn split_small_intervals(
    times: &[f64],
    samples: &[SpectralField],
    eps: f64,
    cfg: &DyadicConfig,
) -> Result<Partition> {
    check_times(times, samples)?;
    if !(eps > 0.0) {
        return Err(ZakError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let table = CutTable::new(samples, cfg)?;
    let last = times.len() - 1;
    let mut bounds = vec![times[0]];
    let mut cuts = Vec::new();
    let mut values = Vec::new();
    let mut a = 0;
    while a < last {
        let first = interval_norm(&table, times, a, a + 1);
        if first.0 >= eps {
            return Err(ZakError::Unattainable { eps, best: first.0 });
        }
        let mut b = a + 1;
        let mut cur = first;
        while b < last {
            let next = interval_norm(&table, times, a, b + 1);
            if next.0 >= eps {
                break;
            }
            b += 1;
            cur = next;
        }
        bounds.push(times[b]);
        cuts.push(cur.1);
        values.push(cur.0);
        a = b;
    }
    Ok(Partition {
        bounds,
        cuts,
        values,
    })
}
