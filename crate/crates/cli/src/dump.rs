//! Binary strain-field dumps.
//!
//! Layout (all little-endian):
//!
//! | offset | size | content                      |
//! |--------|------|------------------------------|
//! | 0      | 8    | magic `DISLOCF\0`            |
//! | 8      | 4    | format version (`u32`)       |
//! | 12     | 4    | reserved, zero               |
//! | 16     | 8    | `n` (`u64`)                  |
//! | 24     | 8    | `L` (`f64`)                  |
//! | 32     | …    | `n³` cells × 9 `f64`         |
//!
//! Cells follow `PeriodicBox::node_index(i, j, k) = (i n + j) n + k`, each
//! cell is the 3×3 matrix row by row.

use std::io::{Read, Write};

use disloc_core::fields::{PeriodicBox, SpatialField};
use disloc_core::{Error, Result};
use nalgebra::Matrix3;

pub const MAGIC: [u8; 8] = *b"DISLOCF\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

pub fn write_field(mut w: impl Write, field: &SpatialField) -> Result<()> {
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&0u32.to_le_bytes());
    header.extend_from_slice(&(field.grid.n as u64).to_le_bytes());
    header.extend_from_slice(&field.grid.l.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(field.data.len() * 72);
    for m in &field.data {
        for r in 0..3 {
            for c in 0..3 {
                buf.extend_from_slice(&m[(r, c)].to_le_bytes());
            }
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field(mut r: impl Read) -> Result<SpatialField> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..8] != MAGIC {
        return Err(Error::InvalidArgument("not a field dump (bad magic)".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::InvalidArgument(format!("unsupported dump version {version}")));
    }
    let n = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(header[24..32].try_into().unwrap());
    let grid = PeriodicBox::new(l, n)?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != n * n * n * 72 {
        return Err(Error::Shape(format!("expected {} bytes of field data, found {}", n * n * n * 72, body.len())));
    }
    let data = body
        .chunks_exact(72)
        .map(|cell| Matrix3::from_fn(|i, j| f64::from_le_bytes(cell[8 * (3 * i + j)..8 * (3 * i + j) + 8].try_into().unwrap())))
        .collect();
    Ok(SpatialField { grid, data, max_imag: 0.0 })
}
