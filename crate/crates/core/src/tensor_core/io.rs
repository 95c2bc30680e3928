//! Binary state files.
//!
//! Layout, all little-endian: the 5-byte magic `LMPO1`, the site count as u64,
//! then (left, right) bond dimensions per site as u64 pairs, then each site's
//! (left, 4, right) tensor row-major with every entry stored as (re, im) f64.

use std::io::{Read, Write};

use crate::error::{LmpoError, Result};
use crate::linalg::C64;

use super::site::{SiteTensor, PHYS};
use super::state::VectorizedState;

pub const MAGIC: &[u8; 5] = b"LMPO1";

/// Refuse headers that would need more than this many entries in one tensor.
const MAX_TENSOR_ENTRIES: u64 = 1 << 32;

pub fn write_state<W: Write>(state: &VectorizedState, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(state.len() as u64).to_le_bytes())?;
    for t in state.tensors() {
        out.write_all(&(t.left as u64).to_le_bytes())?;
        out.write_all(&(t.right as u64).to_le_bytes())?;
    }
    for t in state.tensors() {
        let mut buf = Vec::with_capacity(t.data.len() * 16);
        for z in &t.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b).map_err(|_| LmpoError::Format("truncated header".into()))?;
    Ok(u64::from_le_bytes(b))
}

/// Read a state; `expected_len` rejects files with a different site count.
pub fn read_state<R: Read>(mut input: R, expected_len: Option<usize>) -> Result<VectorizedState> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic).map_err(|_| LmpoError::Format("file too short for a header".into()))?;
    if &magic != MAGIC {
        return Err(LmpoError::Format(format!("bad magic {magic:?}")));
    }
    let n = read_u64(&mut input)?;
    if n == 0 || n > 1 << 20 {
        return Err(LmpoError::Format(format!("implausible site count {n}")));
    }
    if let Some(want) = expected_len {
        if n as usize != want {
            return Err(LmpoError::Format(format!("file holds {n} sites, expected {want}")));
        }
    }
    let mut shapes = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let (l, r) = (read_u64(&mut input)?, read_u64(&mut input)?);
        if l == 0 || r == 0 || l.saturating_mul(r).saturating_mul(PHYS as u64) > MAX_TENSOR_ENTRIES {
            return Err(LmpoError::Format(format!("implausible bond dimensions ({l}, {r})")));
        }
        shapes.push((l as usize, r as usize));
    }
    let mut tensors = Vec::with_capacity(shapes.len());
    for (k, &(l, r)) in shapes.iter().enumerate() {
        let count = l * PHYS * r;
        let mut raw = vec![0u8; count * 16];
        input
            .read_exact(&mut raw)
            .map_err(|_| LmpoError::Format(format!("payload of site {k} is truncated")))?;
        let data = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        tensors.push(SiteTensor::new(k, l, r, data)?);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(LmpoError::Format("trailing bytes after the last tensor".into()));
    }
    VectorizedState::new(tensors)
}
