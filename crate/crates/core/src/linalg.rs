//! Small wrappers around the LAPACK-backed solvers.

use ndarray::Array2;
use ndarray_linalg::Scalar as _;
use ndarray_linalg::{Eigh, UPLO};

use crate::error::Result;
use crate::scalar::Real;

/// Hermitian eigendecomposition with verified eigenvector orientation.
///
/// For row-major complex input LAPACK effectively diagonalizes the
/// transpose, which conjugates the eigenvectors. This wrapper measures the
/// residual of both orientations and returns the one that actually
/// satisfies `H v = lambda v` (for real matrices the two coincide).
pub(crate) fn eigh_checked<T: Real>(
    m: &Array2<T::Cplx>,
) -> Result<(Vec<T>, Array2<T::Cplx>)> {
    let (vals, vecs) = m.eigh(UPLO::Lower)?;
    let residual = |v: &Array2<T::Cplx>| -> T {
        let mut r = T::zero();
        for k in 0..v.ncols() {
            let col = v.column(k);
            let hv = m.dot(&col);
            for i in 0..v.nrows() {
                r = r.max((hv[i] - col[i].mul_real(vals[k])).abs());
            }
        }
        r
    };
    let conjugated = vecs.mapv(|z| z.conj());
    let out = if residual(&conjugated) < residual(&vecs) {
        conjugated
    } else {
        vecs
    };
    Ok((vals.to_vec(), out))
}
