//! Sphere snapshots.
//!
//! Binary layout, little-endian 8-byte words: `lmax: u64, radius: f64,
//! t: f64`, then the `(L+1)·2(L+1)` samples as `f64`, `θ`-major.

use std::io::{Read, Write};
use std::sync::Arc;

use super::grid::SphereGrid;
use super::transform::{SphereField, SphericalSpectrum};
use crate::error::{Error, Result};

pub fn write_binary<W: Write>(mut w: W, field: &SphereField, t: f64) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.lmax() as u64).to_le_bytes())?;
    w.write_all(&g.radius().to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * g.len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_word<R: Read>(r: &mut R) -> Result<[u8; 8]> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::Snapshot(format!("truncated snapshot: {e}")))?;
    Ok(b)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(SphereField, f64)> {
    let lmax = u64::from_le_bytes(read_word(&mut r)?) as usize;
    let radius = f64::from_le_bytes(read_word(&mut r)?);
    let t = f64::from_le_bytes(read_word(&mut r)?);
    let grid = Arc::new(SphereGrid::new(lmax, radius).map_err(|e| Error::Snapshot(format!("bad header: {e}")))?);
    let mut bytes = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Snapshot(format!("truncated sample block: {e}")))?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((SphereField::new(grid, values)?, t))
}

/// Header `theta,phi,value`, one row per node.
pub fn write_csv<W: Write>(mut w: W, field: &SphereField) -> Result<()> {
    writeln!(w, "theta,phi,value")?;
    for (p, v) in field.values().iter().enumerate() {
        let (t, ph) = field.grid().point(p);
        writeln!(w, "{t:e},{ph:e},{v:e}")?;
    }
    Ok(())
}

/// Header `l,m,re,im`, one row per coefficient in storage order.
pub fn write_spectrum_csv<W: Write>(mut w: W, spec: &SphericalSpectrum) -> Result<()> {
    writeln!(w, "l,m,re,im")?;
    for (l, m, c) in spec.iter() {
        writeln!(w, "{l},{m},{:e},{:e}", c.re, c.im)?;
    }
    Ok(())
}
