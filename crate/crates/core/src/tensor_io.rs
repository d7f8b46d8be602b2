//! Raw tensor files: row-major, 64-bit little-endian floats, no header.
//! Shapes live in the accompanying JSON manifest.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayD, IxDyn};

use crate::error::{NgcError, Result};

pub fn write_tensor(path: &Path, data: impl IntoIterator<Item = f64>) -> Result<()> {
    let bytes: Vec<u8> = data.into_iter().flat_map(f64::to_le_bytes).collect();
    fs::write(path, bytes).map_err(|e| NgcError::io(path, e))
}

pub fn write_matrix(path: &Path, m: &Array2<f64>) -> Result<()> {
    // `iter` walks in logical row-major order regardless of memory layout
    write_tensor(path, m.iter().copied())
}

pub fn read_values(path: &Path, expected_len: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| NgcError::io(path, e))?;
    if bytes.len() != expected_len * 8 {
        return Err(NgcError::Checkpoint(format!(
            "{} holds {} bytes, manifest shape needs {}",
            path.display(),
            bytes.len(),
            expected_len * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn read_matrix(path: &Path, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let values = read_values(path, rows * cols)?;
    Ok(Array2::from_shape_vec((rows, cols), values).expect("length checked"))
}

pub fn read_array(path: &Path, shape: &[usize]) -> Result<ArrayD<f64>> {
    let values = read_values(path, shape.iter().product())?;
    Ok(ArrayD::from_shape_vec(IxDyn(shape), values).expect("length checked"))
}
