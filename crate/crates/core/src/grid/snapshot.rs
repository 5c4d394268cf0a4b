//! Binary snapshot format.
//!
//! Little-endian header:
//!
//! | bytes | field        | type |
//! |-------|--------------|------|
//! | 0..4  | magic `SOLR` |      |
//! | 4..8  | version      | u32  |
//! | 8..12 | d            | u32  |
//! | 12..16| n            | u32  |
//! | 16..24| L            | f64  |
//! | 24..32| t            | f64  |
//! | 32..36| spinor_size  | u32  |
//!
//! followed by complex values (`re: f64`, `im: f64`) ordered component-major,
//! then grid points in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Grid, SpinorField};
use crate::error::{Error, Result};
use crate::C64;

pub const MAGIC: &[u8; 4] = b"SOLR";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 36;

pub fn encode(f: &SpinorField) -> Vec<u8> {
    let g = f.grid();
    let s = f.spinor_size();
    let np = g.num_points();
    let mut out = Vec::with_capacity(HEADER_LEN + np * s * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.points_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_width().to_le_bytes());
    out.extend_from_slice(&f.time().to_le_bytes());
    out.extend_from_slice(&(s as u32).to_le_bytes());
    let values = f.values();
    for c in 0..s {
        for i in 0..np {
            let z = values[i * s + c];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<SpinorField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32_at(bytes, 8) as usize;
    let n = u32_at(bytes, 12) as usize;
    let half_width = f64_at(bytes, 16);
    let time = f64_at(bytes, 24);
    let s = u32_at(bytes, 32) as usize;
    let grid = Grid::new(dim, n, half_width)?;
    if s != 1 << (dim - 1) {
        return Err(Error::Format(format!("spinor size {s} does not match dimension {dim}")));
    }
    let np = grid.num_points();
    let expected = HEADER_LEN + np * s * 16;
    if bytes.len() != expected {
        return Err(Error::Format(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mut values = vec![C64::new(0.0, 0.0); np * s];
    let body = &bytes[HEADER_LEN..];
    for c in 0..s {
        for i in 0..np {
            let at = (c * np + i) * 16;
            values[i * s + c] = C64::new(f64_at(body, at), f64_at(body, at + 8));
        }
    }
    SpinorField::new(grid, s, time, values)
}

pub fn write(path: &Path, f: &SpinorField) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(f))?;
    file.sync_all()?;
    Ok(())
}

pub fn read(path: &Path) -> Result<SpinorField> {
    decode(&fs::read(path)?)
}
