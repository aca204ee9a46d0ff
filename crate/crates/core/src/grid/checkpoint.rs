use super::{Grid, SpectralField, ZakharovState};
use crate::error::{Result, ZakError};
use num_complex::Complex64;
use std::io::{Read, Write};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"ZAK4";

/// Binary snapshot of one or more fields sharing a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid,
    pub alpha: f64,
    pub t: f64,
    pub fields: Vec<SpectralField>,
}

impl Checkpoint {
    pub fn from_state(s: &ZakharovState) -> Self {
        Self {
            grid: *s.grid(),
            alpha: s.alpha,
            t: s.t,
            fields: vec![s.u.clone(), s.wave.clone()],
        }
    }

    pub fn into_state(self) -> Result<ZakharovState> {
        let mut it = self.fields.into_iter();
        match (it.next(), it.next(), it.next()) {
            (Some(u), Some(w), None) => ZakharovState::new(u, w, self.t, self.alpha),
            _ => Err(ZakError::Checkpoint(
                "a state checkpoint holds exactly two fields".into(),
            )),
        }
    }
}

pub fn write_checkpoint<W: Write>(mut w: W, c: &Checkpoint) -> Result<()> {
    let g = c.grid;
    if c.fields.iter().any(|f| *f.grid() != g) {
        return Err(ZakError::GridMismatch);
    }
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    w.write_all(&c.alpha.to_le_bytes())?;
    w.write_all(&c.t.to_le_bytes())?;
    w.write_all(&(c.fields.len() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * g.len());
    for f in &c.fields {
        buf.clear();
        for v in f.coeffs() {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(ZakError::Checkpoint("bad magic bytes".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(ZakError::Checkpoint(format!("unsupported version {version}")));
    }
    let d = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let l = read_f64(&mut r)?;
    let grid = Grid::new(d, n, l)?;
    let alpha = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;
    let count = read_u32(&mut r)? as usize;
    let mut fields = Vec::with_capacity(count);
    let mut raw = vec![0u8; 16 * grid.len()];
    for _ in 0..count {
        r.read_exact(&mut raw)?;
        let coeffs = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        fields.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    Ok(Checkpoint {
        grid,
        alpha,
        t,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bytes() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let u = SpectralField::from_fn(g, |x| Complex64::new(x[0], x[1] * x[1]));
        let w = SpectralField::from_fn(g, |x| Complex64::new(x[1].sin(), 0.0));
        let s = ZakharovState::new(u, w, 0.25, 2.0).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &Checkpoint::from_state(&s)).unwrap();
        assert_eq!(&bytes[..4], b"ZAK4");
        assert_eq!(bytes.len(), 4 + 4 * 3 + 8 * 3 + 4 + 2 * 16 * 64);
        let back = read_checkpoint(bytes.as_slice()).unwrap().into_state().unwrap();
        assert_eq!(back, s);
        bytes[0] = b'X';
        assert!(read_checkpoint(bytes.as_slice()).is_err());
    }
}
