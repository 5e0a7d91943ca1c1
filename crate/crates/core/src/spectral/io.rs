//! Binary field format and CSV slice export.
//!
//! Layout (little-endian):
//!
//! | bytes | content                                 |
//! |-------|-----------------------------------------|
//! | 4     | magic `TLLF`                            |
//! | 4     | version (`u32`, currently 1)            |
//! | 4     | dim (`u32`)                             |
//! | 4     | M (`u32`)                               |
//! | 4     | components (`u32`)                      |
//! | 1     | dtype (`0` = f64 real, `1` = c128)      |
//!
//! followed by `components·Mⁿ` samples in the in-memory order (component
//! major, row-major within a component). A `c128` sample is `re` then `im`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::{GridField, Shape};
use crate::error::{Result, TllError};

pub const MAGIC: &[u8; 4] = b"TLLF";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    Real = 0,
    Complex = 1,
}

impl Dtype {
    /// Real if every imaginary part is exactly zero.
    pub fn infer(field: &GridField) -> Dtype {
        if field.data().iter().all(|v| v.im == 0.0) {
            Dtype::Real
        } else {
            Dtype::Complex
        }
    }
}

pub fn write_field<W: Write>(mut w: W, field: &GridField, dtype: Dtype) -> Result<()> {
    let shape = field.shape();
    w.write_all(MAGIC)?;
    for v in [VERSION, shape.dim as u32, shape.resolution as u32, shape.components as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&[dtype as u8])?;
    for v in field.data() {
        w.write_all(&v.re.to_le_bytes())?;
        if dtype == Dtype::Complex {
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
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

pub fn read_field<R: Read>(mut r: R) -> Result<(GridField, Dtype)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TllError::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(TllError::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let m = read_u32(&mut r)? as usize;
    let comps = read_u32(&mut r)? as usize;
    let shape = Shape::new(dim, m, comps).map_err(|e| TllError::Format(e.to_string()))?;
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let dtype = match tag[0] {
        0 => Dtype::Real,
        1 => Dtype::Complex,
        t => return Err(TllError::Format(format!("unknown dtype {t}"))),
    };
    let mut data = Vec::with_capacity(shape.len());
    for _ in 0..shape.len() {
        let re = read_f64(&mut r)?;
        let im = if dtype == Dtype::Complex { read_f64(&mut r)? } else { 0.0 };
        data.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(TllError::Format("trailing bytes after samples".into()));
    }
    Ok((GridField::from_data(shape, data)?, dtype))
}

pub fn save_field(path: impl AsRef<Path>, field: &GridField, dtype: Dtype) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, field, dtype)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<(GridField, Dtype)> {
    read_field(BufReader::new(File::open(path)?))
}

/// CSV of a 1D field or of the 2D slice through index `fixed` on the
/// remaining axes (axes ≥ 2). Columns: grid coordinates, then the real and
/// imaginary part of every component.
pub fn write_csv_slice<W: Write>(mut w: W, field: &GridField, fixed: usize) -> Result<()> {
    let shape = field.shape();
    let m = shape.resolution;
    let plane = shape.dim.min(2);
    let mut header: Vec<String> = (0..plane).map(|a| format!("x{a}")).collect();
    for c in 0..shape.components {
        header.push(format!("re{c}"));
        header.push(format!("im{c}"));
    }
    writeln!(w, "{}", header.join(","))?;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let tail = if shape.dim > 2 {
        let mut t = 0;
        for _ in 2..shape.dim {
            t = t * m + fixed.min(m - 1);
        }
        t
    } else {
        0
    };
    let rows = m.pow(plane as u32);
    let inner = m.pow(shape.dim.saturating_sub(2) as u32);
    for row in 0..rows {
        let flat = row * inner + tail;
        let mut cols: Vec<String> = Vec::new();
        if plane == 2 {
            cols.push(format!("{}", (row / m) as f64 * h));
            cols.push(format!("{}", (row % m) as f64 * h));
        } else {
            cols.push(format!("{}", row as f64 * h));
        }
        for c in 0..shape.components {
            let v = field.component(c)[flat];
            cols.push(format!("{:e}", v.re));
            cols.push(format!("{:e}", v.im));
        }
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}
