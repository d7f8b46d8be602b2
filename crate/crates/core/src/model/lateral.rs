//! Fixed lateral competition structure: neurons are partitioned into
//! contiguous groups ("neural columns") whose members inhibit one another
//! while exciting themselves.

use ndarray::Array2;

use crate::error::{NgcError, Result};

/// Block-diagonal `J x J` mask made of `J / K` all-ones `K x K` blocks.
///
/// Built the same way the group procedure describes it: `J / K` slabs of
/// shape `J x K`, slab `k` holding ones on rows `k*K .. (k+1)*K`, concatenated
/// horizontally.
pub fn build_group_mask(width: usize, group: usize) -> Result<Array2<f64>> {
    if group == 0 || width % group != 0 {
        return Err(NgcError::GroupSize { width, group });
    }
    let slabs: Vec<Array2<f64>> = (0..width / group)
        .map(|k| {
            let mut slab = Array2::zeros((width, group));
            for r in k * group..(k + 1) * group {
                slab.row_mut(r).fill(1.0);
            }
            slab
        })
        .collect();
    let views: Vec<_> = slabs.iter().map(|s| s.view()).collect();
    Ok(ndarray::concatenate(ndarray::Axis(1), &views).expect("slabs share a row count"))
}

/// `V = alpha_h * (M ⊙ (1 - I)) - alpha_e * I`.
///
/// The state update subtracts `V · phi(z)`, so a unit receives
/// `+alpha_e * phi(z_i)` from itself and `-alpha_h * phi(z_j)` from each
/// group mate `j`.
pub fn build_lateral_matrix(mask: &Array2<f64>, alpha_e: f64, alpha_h: f64) -> Result<Array2<f64>> {
    let (r, c) = mask.dim();
    if r != c {
        return Err(NgcError::Shape(format!("lateral mask must be square, got {r}x{c}")));
    }
    let mut v = mask * alpha_h;
    for i in 0..r {
        v[[i, i]] = -alpha_e;
    }
    Ok(v)
}
