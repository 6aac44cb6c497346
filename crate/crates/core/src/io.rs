//! Little-endian binary dumps of fields and many-body amplitudes.
//!
//! Field layout: `d: u32, n: u32, layout: u32` followed by `n^d` pairs
//! `(re: f64, im: f64)`. Layout `0` stores physical samples in row-major grid
//! order; layout `1` stores Fourier coefficients in row-major order with each
//! axis running over `ξ_j = −n/2+1, …, n/2`.
//!
//! State layout: `d: u32, n: u32, slots: u32, layout: u32` followed by
//! `n^{d·slots}` pairs in row-major physical order (layout must be `0`).

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{Spectrum, TorusField};
use crate::grid::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Physical = 0,
    Spectral = 1,
}

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn put_values(w: &mut impl Write, values: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_values(r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

/// Position in transform order of the `i`-th entry of the ascending
/// frequency order `−n/2+1, …, n/2`.
fn ascending_to_transform(n: usize, i: usize) -> usize {
    let k = i as i64 - (n as i64 / 2 - 1);
    if k >= 0 {
        k as usize
    } else {
        (k + n as i64) as usize
    }
}

fn ascending_permutation(grid: GridSpec) -> Vec<usize> {
    (0..grid.len())
        .map(|flat| {
            let idx = grid.unflatten(flat);
            let mut t = [0; 3];
            for axis in 0..grid.dim() {
                t[axis] = ascending_to_transform(grid.n(), idx[axis]);
            }
            grid.flatten(&t)
        })
        .collect()
}

pub fn write_field(w: &mut impl Write, field: &TorusField, layout: Layout) -> Result<()> {
    let grid = field.grid();
    put_u32(w, grid.dim() as u32)?;
    put_u32(w, grid.n() as u32)?;
    put_u32(w, layout as u32)?;
    match layout {
        Layout::Physical => put_values(w, field.values()),
        Layout::Spectral => {
            let spec = field.spectrum();
            let ordered: Vec<Complex64> = ascending_permutation(grid)
                .into_iter()
                .map(|t| spec.coeffs()[t])
                .collect();
            put_values(w, &ordered)
        }
    }
}

pub fn read_field(r: &mut impl Read) -> Result<TorusField> {
    let dim = get_u32(r)? as usize;
    let n = get_u32(r)? as usize;
    let layout = get_u32(r)?;
    let grid = GridSpec::new(dim, n).map_err(|e| LabError::Format(e.to_string()))?;
    let values = get_values(r, grid.len())?;
    match layout {
        0 => TorusField::from_values(grid, values),
        1 => {
            let mut coeffs = vec![Complex64::default(); grid.len()];
            for (v, t) in values.into_iter().zip(ascending_permutation(grid)) {
                coeffs[t] = v;
            }
            Ok(Spectrum::from_coeffs(grid, coeffs)?.to_field())
        }
        other => Err(LabError::Format(format!("unknown layout tag {other}"))),
    }
}

pub fn write_state(
    w: &mut impl Write,
    grid: GridSpec,
    slots: usize,
    amplitudes: &[Complex64],
) -> Result<()> {
    if amplitudes.len() as u128 != (grid.len() as u128).pow(slots as u32) {
        return Err(LabError::GridMismatch("amplitude count does not match slots".into()));
    }
    put_u32(w, grid.dim() as u32)?;
    put_u32(w, grid.n() as u32)?;
    put_u32(w, slots as u32)?;
    put_u32(w, Layout::Physical as u32)?;
    put_values(w, amplitudes)
}

pub fn read_state(r: &mut impl Read) -> Result<(GridSpec, usize, Vec<Complex64>)> {
    let dim = get_u32(r)? as usize;
    let n = get_u32(r)? as usize;
    let slots = get_u32(r)? as usize;
    let layout = get_u32(r)?;
    if layout != 0 {
        return Err(LabError::Format(format!("state dumps must be physical, got layout {layout}")));
    }
    let grid = GridSpec::new(dim, n).map_err(|e| LabError::Format(e.to_string()))?;
    let count = (grid.len() as u128)
        .checked_pow(slots as u32)
        .filter(|&c| c <= 1 << 28)
        .ok_or_else(|| LabError::Format("state too large".into()))?;
    let values = get_values(r, count as usize)?;
    Ok((grid, slots, values))
}
