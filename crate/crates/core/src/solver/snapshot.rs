//! Binary field snapshots.
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size | content |
//! |-------:|-----:|---------|
//! | 0      | 8    | magic `KSLABF64` |
//! | 8      | 4    | `dim` (u32) |
//! | 12     | 12   | cell counts `n0 n1 n2` (u32 each, `1` for unused axes) |
//! | 24     | 8    | time `t` (f64) |
//! | 32     | 8·N  | cell values (f64), lexicographic with the last axis fastest |
//!
//! Extents are not stored; the reader supplies them.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub const MAGIC: &[u8; 8] = b"KSLABF64";
pub const HEADER_LEN: usize = 32;

pub fn encode_field(f: &Field, t: f64) -> Vec<u8> {
    let g = f.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    for d in 0..3 {
        let n = g.cells().get(d).copied().unwrap_or(1);
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    buf.extend_from_slice(&t.to_le_bytes());
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_field(bytes: &[u8], extents: &[f64]) -> Result<(Field, f64)> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Snapshot("missing KSLABF64 header".into()));
    }
    let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let dim = word(8);
    if !(1..=3).contains(&dim) {
        return Err(Error::Snapshot(format!("bad dimension {dim}")));
    }
    let cells: Vec<usize> = (0..dim).map(|d| word(12 + 4 * d)).collect();
    let t = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let grid = Grid::new(dim, extents, &cells)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * grid.len() {
        return Err(Error::Snapshot(format!(
            "expected {} values, found {} bytes",
            grid.len(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((Field::new(grid, values)?, t))
}

pub fn write_field(path: impl AsRef<Path>, f: &Field, t: f64) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_field(f, t)).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>, extents: &[f64]) -> Result<(Field, f64)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field(&bytes, extents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(2, &[1.0, 2.0], &[5, 7]).unwrap();
        let f = Field::from_fn(g, |x| x[0].sin() + x[1] * 1e-7);
        let bytes = encode_field(&f, 0.125);
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 35);
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[20..24], &1u32.to_le_bytes());
        let (back, t) = decode_field(&bytes, &[1.0, 2.0]).unwrap();
        assert_eq!(t, 0.125);
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_field(b"nope", &[1.0]).is_err());
        let g = Grid::new(1, &[1.0], &[4]).unwrap();
        let mut b = encode_field(&Field::zeros(g), 0.0);
        b.pop();
        assert!(decode_field(&b, &[1.0]).is_err());
    }
}
