//! Field snapshots.
//!
//! Binary layout, all little-endian 8-byte words:
//! `dim: u64, n: u64, L_0..L_{dim-1}: f64, t: f64`, then the `n^dim` samples
//! as `f64` in row-major order (last axis fastest).

use std::io::{Read, Write};

use super::grid::{ScalarField, TorusGrid, MAX_DIM};
use crate::error::{Error, Result};

/// CSV export is refused above this many nodes.
pub const CSV_MAX_POINTS: usize = 1 << 16;

pub fn write_binary<W: Write>(mut w: W, field: &ScalarField, t: f64) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.dim() as u64).to_le_bytes())?;
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    for l in g.lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * field.samples().len());
    for v in field.samples() {
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

/// Inverse of [`write_binary`]; returns the field and its time stamp.
pub fn read_binary<R: Read>(mut r: R) -> Result<(ScalarField, f64)> {
    let dim = u64::from_le_bytes(read_word(&mut r)?) as usize;
    let n = u64::from_le_bytes(read_word(&mut r)?) as usize;
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::Snapshot(format!("bad dimension {dim} in header")));
    }
    let lengths = (0..dim)
        .map(|_| Ok(f64::from_le_bytes(read_word(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    let t = f64::from_le_bytes(read_word(&mut r)?);
    let grid = TorusGrid::unchecked_resolution(dim, n, lengths)
        .map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Snapshot(format!("truncated sample block: {e}")))?;
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ScalarField::new(grid, samples)?, t))
}

/// One row per node: coordinates `x0..x{dim-1}` then `value`.
pub fn write_csv<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    if g.len() > CSV_MAX_POINTS {
        return Err(Error::InvalidArgument(format!(
            "{} nodes is too many for a CSV snapshot (limit {CSV_MAX_POINTS})",
            g.len()
        )));
    }
    let header: Vec<String> = (0..g.dim()).map(|a| format!("x{a}")).chain(["value".into()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (p, v) in field.samples().iter().enumerate() {
        let x = g.point(p);
        for c in &x[..g.dim()] {
            write!(w, "{c:e},")?;
        }
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = TorusGrid::new(2, 16, vec![1.0, 3.0]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] * 2.0 - x[1]).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &f, 0.25).unwrap();
        assert_eq!(buf.len(), 8 * (2 + 2 + 1 + 256));
        let (back, t) = read_binary(&buf[..]).unwrap();
        assert_eq!(t, 0.25);
        assert_eq!(back, f);
        assert!(matches!(read_binary(&buf[..40]), Err(Error::Snapshot(_))));
    }

    #[test]
    fn csv_layout() {
        let g = TorusGrid::periodic_box(2, 16).unwrap();
        let f = ScalarField::constant(&g, 1.5);
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x0,x1,value");
        assert_eq!(lines.len(), 257);
        assert!(lines[1].ends_with(",1.5e0"));
    }
}
