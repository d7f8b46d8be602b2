//! IDX tensor files as used by the MNIST family: a big-endian header
//! (`0x00 0x00 <type> <rank>` then `rank` u32 dimensions) followed by the
//! payload. Only the unsigned-byte element type (`0x08`) is supported.

use std::path::Path;

use crate::error::{NgcError, Result};

pub const UBYTE_TYPE: u8 = 0x08;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxTensor {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

impl IdxTensor {
    /// Number of records along the first dimension.
    pub fn len(&self) -> usize {
        self.dims.first().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Elements per record (product of the trailing dimensions).
    pub fn record_size(&self) -> usize {
        self.dims.iter().skip(1).product()
    }

    pub fn record(&self, i: usize) -> &[u8] {
        let n = self.record_size();
        &self.data[i * n..(i + 1) * n]
    }
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxTensor> {
    if bytes.len() < 4 {
        return Err(NgcError::IdxTruncated {
            expected: 4,
            found: bytes.len(),
        });
    }
    let magic = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes"));
    if bytes[0] != 0 || bytes[1] != 0 || bytes[2] != UBYTE_TYPE || bytes[3] == 0 {
        return Err(NgcError::IdxMagic(magic));
    }
    let rank = bytes[3] as usize;
    let header = 4 + 4 * rank;
    if bytes.len() < header {
        return Err(NgcError::IdxTruncated {
            expected: header,
            found: bytes.len(),
        });
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    let payload = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(NgcError::IdxDimOverflow)?;
    let expected = header.checked_add(payload).ok_or(NgcError::IdxDimOverflow)?;
    if bytes.len() < expected {
        return Err(NgcError::IdxTruncated {
            expected: payload,
            found: bytes.len() - header,
        });
    }
    Ok(IdxTensor {
        dims,
        data: bytes[header..expected].to_vec(),
    })
}

pub fn load_idx(path: &Path) -> Result<IdxTensor> {
    let bytes = std::fs::read(path).map_err(|e| NgcError::io(path, e))?;
    parse_idx(&bytes)
}

/// Serialises an unsigned-byte tensor back to IDX bytes.
pub fn encode_idx(tensor: &IdxTensor) -> Vec<u8> {
    let mut out = vec![0, 0, UBYTE_TYPE, tensor.dims.len() as u8];
    for &d in &tensor.dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(&tensor.data);
    out
}
