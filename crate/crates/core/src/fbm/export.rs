//! Batch dumps: CSV (one row per path and component) and a little-endian
//! binary format with magic `FBMB`.

use std::io::{Read, Write};

use super::batch::{PathBatch, PathKind};
use super::grid::TimeGrid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"FBMB";
const VERSION: u32 = 1;

fn kind_code(kind: PathKind) -> u8 {
    match kind {
        PathKind::Wiener => 0,
        PathKind::FractionalBrownian => 1,
        PathKind::Solution => 2,
    }
}

fn kind_from_code(code: u8) -> Result<PathKind> {
    match code {
        0 => Ok(PathKind::Wiener),
        1 => Ok(PathKind::FractionalBrownian),
        2 => Ok(PathKind::Solution),
        c => Err(Error::Config(format!("unknown path kind code {c}"))),
    }
}

/// Writes `# h=..,T=..,n=..,seed=..,method=..` then `path,component,v0,..,vn`.
pub fn write_csv<T: Scalar, W: Write>(batch: &PathBatch<T>, mut out: W) -> Result<()> {
    let grid = batch.grid();
    let h = batch.hurst().map_or_else(|| "na".to_string(), |h| format!("{}", h.as_f64()));
    writeln!(
        out,
        "# h={},T={},n={},seed={},method={},kind={}",
        h,
        grid.t_end().as_f64(),
        grid.n_steps(),
        batch.seed(),
        batch.method(),
        batch.kind().tag()
    )?;
    let mut header = String::from("path,component");
    for i in 0..grid.n_nodes() {
        header.push_str(&format!(",v{i}"));
    }
    writeln!(out, "{header}")?;
    for p in 0..batch.count() {
        for c in 0..batch.dim() {
            let mut line = format!("{p},{c}");
            for v in batch.component(p, c) {
                line.push_str(&format!(",{}", v.as_f64()));
            }
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Binary layout (little endian): magic, version u32, kind u8, dim u32,
/// n_steps u32, count u64, seed u64, T f64, h f64 (NaN if absent),
/// method length u32 + UTF-8 bytes, then `count·(n+1)·dim` f64 values.
pub fn write_binary<T: Scalar, W: Write>(batch: &PathBatch<T>, mut out: W) -> Result<()> {
    let grid = batch.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[kind_code(batch.kind())])?;
    out.write_all(&(batch.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.n_steps() as u32).to_le_bytes())?;
    out.write_all(&(batch.count() as u64).to_le_bytes())?;
    out.write_all(&batch.seed().to_le_bytes())?;
    out.write_all(&grid.t_end().as_f64().to_le_bytes())?;
    out.write_all(&batch.hurst().map_or(f64::NAN, |h| h.as_f64()).to_le_bytes())?;
    let method = batch.method().as_bytes();
    out.write_all(&(method.len() as u32).to_le_bytes())?;
    out.write_all(method)?;
    for v in batch.data() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Reads a batch written by [`write_binary`].
pub fn read_binary<T: Scalar, R: Read>(mut r: R) -> Result<PathBatch<T>> {
    if &take::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Config("not a path batch file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != VERSION {
        return Err(Error::Config(format!("unsupported batch file version {version}")));
    }
    let kind = kind_from_code(take::<1, _>(&mut r)?[0])?;
    let dim = u32::from_le_bytes(take(&mut r)?) as usize;
    let n_steps = u32::from_le_bytes(take(&mut r)?) as usize;
    let count = u64::from_le_bytes(take(&mut r)?) as usize;
    let seed = u64::from_le_bytes(take(&mut r)?);
    let t_end = f64::from_le_bytes(take(&mut r)?);
    let h = f64::from_le_bytes(take(&mut r)?);
    let mlen = u32::from_le_bytes(take(&mut r)?) as usize;
    let mut mbytes = vec![0u8; mlen];
    r.read_exact(&mut mbytes)?;
    let method = String::from_utf8(mbytes).map_err(|e| Error::Config(e.to_string()))?;
    let total = count * (n_steps + 1) * dim;
    let mut data = Vec::with_capacity(total);
    for _ in 0..total {
        data.push(T::of(f64::from_le_bytes(take(&mut r)?)));
    }
    let grid = TimeGrid::new(T::of(t_end), n_steps)?;
    let batch = PathBatch::from_data(dim, grid, count, seed, kind, &method, data)?;
    Ok(if h.is_nan() { batch } else { batch.with_hurst(T::of(h)) })
}
