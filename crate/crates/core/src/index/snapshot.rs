//! Binary snapshot of index contents.
//!
//! Little-endian layout:
//!
//! ```text
//! magic    "SMFX"
//! version  u32 (= 1)
//! dim      u32
//! count    u64
//! count x { pid_len u32, pid UTF-8 bytes, offset u32, dim x f64 }
//! ```

use std::io::{self, Read, Write};

use super::IndexedWindow;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SMFX";
pub const VERSION: u32 = 1;

fn malformed(msg: impl Into<String>) -> Error {
    Error::Format { what: "index snapshot", msg: msg.into() }
}

fn to_u32(x: usize, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| malformed(format!("{what} {x} does not fit in 32 bits")))
}

pub fn write_snapshot<'a, W: Write>(
    mut w: W,
    dim: usize,
    items: impl ExactSizeIterator<Item = &'a IndexedWindow>,
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&to_u32(dim, "dimension")?.to_le_bytes())?;
    w.write_all(&(items.len() as u64).to_le_bytes())?;
    for item in items {
        if item.vector.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: item.vector.len() });
        }
        w.write_all(&to_u32(item.pid.len(), "pid length")?.to_le_bytes())?;
        w.write_all(item.pid.as_bytes())?;
        w.write_all(&to_u32(item.offset, "offset")?.to_le_bytes())?;
        for v in &item.vector {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => malformed("truncated file"),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    read_array::<4, _>(r).map(u32::from_le_bytes)
}

/// Returns the dimensionality and the items in stored order.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(usize, Vec<IndexedWindow>)> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let count = u64::from_le_bytes(read_array::<8, _>(&mut r)?);
    let mut items = Vec::with_capacity(count.min(1 << 20) as usize);
    for _ in 0..count {
        let pid_len = read_u32(&mut r)? as usize;
        let mut pid = vec![0u8; pid_len];
        r.read_exact(&mut pid).map_err(|_| malformed("truncated pid"))?;
        let pid = String::from_utf8(pid).map_err(|_| malformed("pid is not UTF-8"))?;
        let offset = read_u32(&mut r)? as usize;
        let vector = (0..dim)
            .map(|_| read_array::<8, _>(&mut r).map(f64::from_le_bytes))
            .collect::<Result<Vec<_>>>()?;
        items.push(IndexedWindow { vector, pid, offset });
    }
    Ok((dim, items))
}
