//! Spectral helpers backed by nalgebra's Hermitian eigensolver and SVD.

use nalgebra::SymmetricEigen;

use super::{ComplexMatrix, C64, HERMITIAN_TOL};
use crate::error::Result;

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching eigenvectors as columns.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    m.require_hermitian(HERMITIAN_TOL.max(1e-9 * m.max_abs()))?;
    Ok(eigh_unchecked(&m.hermitize()))
}

pub(crate) fn eigh_unchecked(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.rows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eigh(m)?.0)
}

/// Smallest eigenvalue of the Hermitian part; negative means "not PSD".
pub fn psd_margin(m: &ComplexMatrix) -> Result<f64> {
    let vals = eigvalsh(m)?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let vals = eigvalsh(m)?;
    Ok(vals.last().copied().unwrap_or(0.0))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    if m.is_square() && m.is_hermitian(1e-12) {
        let (vals, _) = eigh_unchecked(&m.hermitize());
        return vals.iter().map(|v| v.abs()).sum();
    }
    m.to_nalgebra().singular_values().iter().sum()
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    m.to_nalgebra().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = eigh(m)?;
    let n = vals.len();
    let fv: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| vecs[(i, k)] * vecs[(j, k)].conj() * fv[k]).sum::<C64>()
    }))
}

/// Square root of a PSD matrix (negative eigenvalues clipped to zero).
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrt_pd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    hermitian_function(m, |x| 1.0 / x.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_y_spectrum() {
        let y = ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let (vals, vecs) = eigh(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let v = vecs.column(1);
        let yv = y.mul_vec(&v);
        for k in 0..2 {
            assert!((yv[k] - v[k]).norm() < 1e-12);
        }
        assert!((trace_norm(&y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::unit(2, 0, 1);
        assert!(psd_margin(&m).is_err());
        assert!((trace_norm(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = sqrt_psd(&m).unwrap();
        assert!((&s * &s).dist_max(&m) < 1e-12);
    }
}
