//! Little-endian binary snapshots of fields and densities.
//!
//! Layout: `b"NLSF"`, version `u32`, dim `u32`, n `u32`, half_width `f64`,
//! frame `u8`, time `f64`, then row-major payload. Complex fields store
//! interleaved `(re, im)` pairs, densities plain `f64`; the payload length
//! tells them apart.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Density, Frame};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"NLSF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 1 + 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Field(ComplexField),
    Density { density: Density, frame: Frame, time: f64 },
}

impl Checkpoint {
    pub fn grid(&self) -> Grid {
        match self {
            Checkpoint::Field(f) => f.grid,
            Checkpoint::Density { density, .. } => density.grid,
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            Checkpoint::Field(f) => f.time,
            Checkpoint::Density { time, .. } => *time,
        }
    }

    /// `|u|²` for fields, the stored values for densities.
    pub fn to_density(&self) -> Density {
        match self {
            Checkpoint::Field(f) => f.density(),
            Checkpoint::Density { density, .. } => density.clone(),
        }
    }
}

fn header(grid: &Grid, frame: Frame, time: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.push(frame.tag());
    out.extend_from_slice(&time.to_le_bytes());
    out
}

pub fn encode_field(field: &ComplexField) -> Vec<u8> {
    let mut out = header(&field.grid, field.frame, field.time);
    out.reserve(field.values.len() * 16);
    for z in &field.values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn encode_density(density: &Density, frame: Frame, time: f64) -> Vec<u8> {
    let mut out = header(&density.grid, frame, time);
    out.reserve(density.values().len() * 8);
    for v in density.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let end = *at + N;
    let slice = bytes
        .get(*at..end)
        .ok_or_else(|| Error::Checkpoint("truncated header".into()))?;
    *at = end;
    Ok(slice.try_into().expect("slice length"))
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut at = 0;
    if &take::<4>(bytes, &mut at)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, &mut at)?);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(take(bytes, &mut at)?) as usize;
    let n = u32::from_le_bytes(take(bytes, &mut at)?) as usize;
    let half_width = f64::from_le_bytes(take(bytes, &mut at)?);
    let [tag] = take::<1>(bytes, &mut at)?;
    let time = f64::from_le_bytes(take(bytes, &mut at)?);
    let grid = Grid::new(dim, n, half_width)?;
    let frame =
        Frame::from_tag(tag).ok_or_else(|| Error::Checkpoint(format!("bad frame tag {tag}")))?;
    let payload = &bytes[at..];
    let points = grid.len();
    let read = |i: usize| f64::from_le_bytes(payload[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    if payload.len() == 16 * points {
        let values = (0..points)
            .map(|j| Complex64::new(read(2 * j), read(2 * j + 1)))
            .collect();
        Ok(Checkpoint::Field(ComplexField::new(grid, values, frame, time)?))
    } else if payload.len() == 8 * points {
        let values = (0..points).map(read).collect();
        Ok(Checkpoint::Density { density: Density::new(grid, values)?, frame, time })
    } else {
        Err(Error::Checkpoint(format!(
            "payload of {} bytes fits neither layout for {points} points",
            payload.len()
        )))
    }
}

pub fn write_field(path: &Path, field: &ComplexField) -> std::io::Result<()> {
    std::fs::File::create(path)?.write_all(&encode_field(field))
}

pub fn write_density(path: &Path, density: &Density, frame: Frame, time: f64) -> std::io::Result<()> {
    std::fs::File::create(path)?.write_all(&encode_density(density, frame, time))
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(1, 8, 2.0).unwrap();
        let f = ComplexField::new(g, vec![Complex64::new(1.0, -2.0); 8], Frame::SelfSimilar, 0.25)
            .unwrap();
        let b = encode_field(&f);
        assert_eq!(&b[..4], b"NLSF");
        assert_eq!(HEADER_LEN, 33);
        assert_eq!(b.len(), 33 + 16 * 8);
        assert_eq!(b[24], 1);
        assert_eq!(f64::from_le_bytes(b[25..33].try_into().unwrap()), 0.25);
        assert_eq!(f64::from_le_bytes(b[33..41].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(b[41..49].try_into().unwrap()), -2.0);
        assert_eq!(decode(&b).unwrap(), Checkpoint::Field(f));
    }

    #[test]
    fn density_roundtrip() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let d = Density::new(g, (0..64).map(|i| i as f64).collect()).unwrap();
        let b = encode_density(&d, Frame::Lab, 3.0);
        match decode(&b).unwrap() {
            Checkpoint::Density { density, frame, time } => {
                assert_eq!(density, d);
                assert_eq!(frame, Frame::Lab);
                assert_eq!(time, 3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"NLSX").is_err());
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut b = encode_density(&Density::new(g, vec![1.0; 8]).unwrap(), Frame::Lab, 0.0);
        b.pop();
        assert!(decode(&b).is_err());
    }
}
