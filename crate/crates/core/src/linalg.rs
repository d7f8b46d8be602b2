//! Small dense linear-algebra helpers for symmetric positive-definite
//! matrices. Eigen-decompositions are delegated to `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{NgcError, Result};

fn to_na(m: ArrayView2<'_, f64>) -> DMatrix<f64> {
    let (r, c) = m.dim();
    DMatrix::from_fn(r, c, |i, j| m[[i, j]])
}

fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn symmetrize(m: &Array2<f64>) -> Array2<f64> {
    (m + &m.t()) * 0.5
}

pub fn is_diagonal(m: ArrayView2<'_, f64>) -> bool {
    m.indexed_iter().all(|((i, j), &v)| i == j || v == 0.0)
}

/// Symmetric eigenvalues and eigenvectors (columns).
pub fn sym_eigen(m: ArrayView2<'_, f64>) -> (Array1<f64>, Array2<f64>) {
    let eig = SymmetricEigen::new(to_na(m));
    (
        Array1::from_iter(eig.eigenvalues.iter().copied()),
        from_na(&eig.eigenvectors),
    )
}

/// Symmetrises `m` and clamps its eigenvalues from below at `floor`.
pub fn project_spd(m: &Array2<f64>, floor: f64) -> Array2<f64> {
    let s = symmetrize(m);
    if is_diagonal(s.view()) {
        let mut out = s;
        for i in 0..out.nrows() {
            out[[i, i]] = out[[i, i]].max(floor);
        }
        return out;
    }
    let (vals, vecs) = sym_eigen(s.view());
    let clamped = vals.mapv(|v| v.max(floor));
    let scaled = &vecs * &clamped.insert_axis(ndarray::Axis(0));
    symmetrize(&scaled.dot(&vecs.t()))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(m: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if is_diagonal(m) {
        let mut out = Array2::zeros(m.dim());
        for i in 0..m.nrows() {
            let d = m[[i, i]];
            if !(d > 0.0) {
                return Err(NgcError::NotPositiveDefinite(format!("diagonal entry {d}")));
            }
            out[[i, i]] = 1.0 / d;
        }
        return Ok(out);
    }
    let chol = to_na(m)
        .cholesky()
        .ok_or_else(|| NgcError::NotPositiveDefinite("cholesky failed".into()))?;
    Ok(from_na(&chol.inverse()))
}

/// `log |m|` for a symmetric positive-definite matrix.
pub fn spd_log_det(m: ArrayView2<'_, f64>) -> Result<f64> {
    if is_diagonal(m) {
        let mut acc = 0.0;
        for i in 0..m.nrows() {
            let d = m[[i, i]];
            if !(d > 0.0) {
                return Err(NgcError::NotPositiveDefinite(format!("diagonal entry {d}")));
            }
            acc += d.ln();
        }
        return Ok(acc);
    }
    let chol = to_na(m)
        .cholesky()
        .ok_or_else(|| NgcError::NotPositiveDefinite("cholesky failed".into()))?;
    let l = chol.l();
    Ok(2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>())
}

/// `log det(m)` of a general square matrix with positive determinant, via
/// LU. Unlike [`spd_log_det`] it reads every entry, so its entrywise
/// derivative is exactly `m^{-T}`.
pub fn log_det(m: ArrayView2<'_, f64>) -> Result<f64> {
    let lu = to_na(m).lu();
    let u = lu.u();
    let mut sign: f64 = lu.p().determinant();
    let mut acc = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        sign *= d.signum();
        acc += d.abs().ln();
    }
    if !(sign > 0.0) || !acc.is_finite() {
        return Err(NgcError::NotPositiveDefinite("determinant is not positive".into()));
    }
    Ok(acc)
}

/// Lower Cholesky factor.
pub fn cholesky_lower(m: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let chol = to_na(m)
        .cholesky()
        .ok_or_else(|| NgcError::NotPositiveDefinite("cholesky failed".into()))?;
    Ok(from_na(&chol.l()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_log_det_matches_spd_and_rejects_negative() {
        let m = ndarray::array![[2.0, 0.5], [0.5, 1.0]];
        assert!((log_det(m.view()).unwrap() - spd_log_det(m.view()).unwrap()).abs() < 1e-14);
        let swapped = ndarray::array![[0.0, 1.0], [1.0, 0.0]];
        assert!(log_det(swapped.view()).is_err());
        let skew = ndarray::array![[1.0, 3.0], [0.0, 2.0]];
        assert!((log_det(skew.view()).unwrap() - 2f64.ln()).abs() < 1e-14);
    }
    use ndarray::array;

    #[test]
    fn projection_floors_eigenvalues() {
        let m = array![[1.0, 2.0], [2.0, 1.0]]; // eigenvalues 3, -1
        let p = project_spd(&m, 1e-3);
        let (vals, _) = sym_eigen(p.view());
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min - 1e-3).abs() < 1e-12);
        assert!((p[[0, 1]] - p[[1, 0]]).abs() == 0.0);
    }

    #[test]
    fn inverse_and_log_det() {
        let m = array![[2.0, 1.0], [1.0, 2.0]];
        let inv = spd_inverse(m.view()).unwrap();
        let id = m.dot(&inv);
        assert!((id[[0, 0]] - 1.0).abs() < 1e-12 && id[[0, 1]].abs() < 1e-12);
        assert!((spd_log_det(m.view()).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!(spd_log_det(array![[1.0, 0.0], [0.0, -1.0]].view()).is_err());
    }
}
