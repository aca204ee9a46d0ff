use super::{project_band, Band, DyadicConfig};
use crate::error::Result;
use crate::grid::{Padder, SpectralField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Frequency interaction class of a product `uv`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interaction {
    /// `P_{≤k-K}u · P_k v`
    LH,
    /// `P_k u · P_{≤k-K}v`
    HL,
    /// `P_{k₁}u · P_{k₂}v` with `|k₁-k₂| ≤ K-1`
    HH,
    /// HL with the high shell in the α-band `|k - log₂α| ≤ 1`
    AlphaL,
    /// LH with the high shell of `v` in the α-band
    LAlpha,
    /// HL minus AlphaL
    XL,
    /// LH minus LAlpha
    LX,
}

impl Interaction {
    pub const ALL: [Interaction; 7] = [
        Interaction::LH,
        Interaction::HL,
        Interaction::HH,
        Interaction::AlphaL,
        Interaction::LAlpha,
        Interaction::XL,
        Interaction::LX,
    ];

    /// Whether the band pair `(first factor, second factor)` belongs to this class.
    ///
    /// The head band acts as the lowest shell: it pairs as "low" against every
    /// shell and the head-head pair is counted in HH.
    pub fn contains(self, cfg: &DyadicConfig, first: Band, second: Band) -> bool {
        let k = cfg.gap() as i32;
        let low_of = |low: Band, high: i32| match low {
            Band::Head => true,
            Band::Shell(j) => j <= high - k,
        };
        match self {
            Interaction::LH => match second {
                Band::Shell(h) => low_of(first, h),
                Band::Head => false,
            },
            Interaction::HL => Interaction::LH.contains(cfg, second, first),
            Interaction::HH => match (first, second) {
                (Band::Head, Band::Head) => true,
                (Band::Shell(a), Band::Shell(b)) => (a - b).abs() < k,
                _ => false,
            },
            Interaction::AlphaL => match first {
                Band::Shell(h) => cfg.in_alpha_band(h) && low_of(second, h),
                Band::Head => false,
            },
            Interaction::XL => match first {
                Band::Shell(h) => !cfg.in_alpha_band(h) && low_of(second, h),
                Band::Head => false,
            },
            Interaction::LAlpha => Interaction::AlphaL.contains(cfg, second, first),
            Interaction::LX => Interaction::XL.contains(cfg, second, first),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Interaction::LH => "LH",
            Interaction::HL => "HL",
            Interaction::HH => "HH",
            Interaction::AlphaL => "aL",
            Interaction::LAlpha => "La",
            Interaction::XL => "XL",
            Interaction::LX => "LX",
        }
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Interaction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "LH" => Interaction::LH,
            "HL" => Interaction::HL,
            "HH" => Interaction::HH,
            "aL" | "alphaL" | "αL" => Interaction::AlphaL,
            "La" | "Lalpha" | "Lα" => Interaction::LAlpha,
            "XL" => Interaction::XL,
            "LX" => Interaction::LX,
            other => return Err(format!("unknown interaction {other}")),
        })
    }
}

/// Band-projected pieces of a field, sampled on the padded grid.
pub struct BandPieces {
    pieces: Vec<Option<Vec<Complex64>>>,
}

impl BandPieces {
    pub fn new(f: &SpectralField, cfg: &DyadicConfig) -> Result<Self> {
        cfg.check_grid(f)?;
        let pad = Padder::new(*cfg.grid());
        Ok(Self::with_padder(f, cfg, &pad))
    }

    pub(crate) fn with_padder(f: &SpectralField, cfg: &DyadicConfig, pad: &Padder) -> Self {
        let pieces = (0..cfg.table().bands.len())
            .map(|b| {
                let p = project_band(f, b, cfg);
                if p.is_zero() {
                    None
                } else {
                    Some(pad.to_physical(&p))
                }
            })
            .collect();
        Self { pieces }
    }
}

/// `(uv)_kind` for one interaction class.
pub fn paraproduct(
    u: &SpectralField,
    v: &SpectralField,
    kind: Interaction,
    cfg: &DyadicConfig,
) -> Result<SpectralField> {
    paraproduct_sum(u, v, &[kind], cfg)
}

/// Sum of the listed interaction classes of `uv` (a class listed twice counts twice).
pub fn paraproduct_sum(
    u: &SpectralField,
    v: &SpectralField,
    kinds: &[Interaction],
    cfg: &DyadicConfig,
) -> Result<SpectralField> {
    cfg.check_grid(u)?;
    cfg.check_grid(v)?;
    let pad = Padder::new(*cfg.grid());
    let pu = BandPieces::with_padder(u, cfg, &pad);
    let pv = BandPieces::with_padder(v, cfg, &pad);
    Ok(combine_pieces(&pu, &pv, kinds, cfg, &pad))
}

/// One `paraproduct_sum` per group, sharing a single band decomposition of `u` and `v`.
pub fn paraproduct_sums(
    u: &SpectralField,
    v: &SpectralField,
    groups: &[&[Interaction]],
    cfg: &DyadicConfig,
) -> Result<Vec<SpectralField>> {
    cfg.check_grid(u)?;
    cfg.check_grid(v)?;
    let pad = Padder::new(*cfg.grid());
    let pu = BandPieces::with_padder(u, cfg, &pad);
    let pv = BandPieces::with_padder(v, cfg, &pad);
    Ok(groups.iter().map(|k| combine_pieces(&pu, &pv, k, cfg, &pad)).collect())
}

pub(crate) fn combine_pieces(
    pu: &BandPieces,
    pv: &BandPieces,
    kinds: &[Interaction],
    cfg: &DyadicConfig,
    pad: &Padder,
) -> SpectralField {
    let bands = &cfg.table().bands;
    let len = pad.padded_len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    for (j, vb) in bands.iter().enumerate() {
        let Some(vj) = &pv.pieces[j] else { continue };
        let mut any = false;
        acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (i, ub) in bands.iter().enumerate() {
            let Some(ui) = &pu.pieces[i] else { continue };
            let count = kinds.iter().filter(|k| k.contains(cfg, *ub, *vb)).count();
            if count == 0 {
                continue;
            }
            any = true;
            let c = count as f64;
            acc.iter_mut().zip(ui).for_each(|(a, x)| *a += x * c);
        }
        if any {
            out.iter_mut()
                .zip(acc.iter().zip(vj))
                .for_each(|(o, (a, y))| *o += a * y);
        }
    }
    pad.from_physical(out)
}
