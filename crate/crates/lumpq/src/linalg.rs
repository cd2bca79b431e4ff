//! Thin seam over the LAPACK-backed decompositions. Everything else in the
//! crate does its matrix products in pure Rust (ndarray), so run-to-run
//! determinism only depends on LAPACK being called with identical inputs.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

extern "C" {
    fn openblas_set_num_threads(n: std::ffi::c_int);
}

/// Caps the BLAS/LAPACK thread pool. Callers that parallelize at the task
/// level (benchmark trials, test suites) keep each decomposition
/// single-threaded; repeated runs then see identical thread layouts.
pub fn limit_lapack_threads(n: usize) {
    unsafe { openblas_set_num_threads(n.max(1) as std::ffi::c_int) };
}

/// Eigenvalues and right eigenvectors of a general real matrix.
/// Columns of the returned matrix pair with the eigenvalues in LAPACK order.
pub(crate) fn eig_general(a: &Array2<f64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    a.eig()
        .map_err(|e| Error::EigenFailure(format!("general eigensolver: {e}")))
}

/// Eigenvalues only, general real matrix.
pub(crate) fn eigvals_general(a: &Array2<f64>) -> Result<Array1<Complex64>> {
    // LAPACK dgeev without vectors would do; taking the full call keeps one code path.
    eig_general(a).map(|(vals, _)| vals)
}

/// Ascending eigendecomposition of a real symmetric matrix.
pub(crate) fn eigh_real(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    a.eigh(UPLO::Lower)
        .map_err(|e| Error::EigenFailure(format!("symmetric eigensolver: {e}")))
}

/// Ascending eigendecomposition of a complex Hermitian matrix.
pub(crate) fn eigh_complex(a: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| Error::EigenFailure(format!("hermitian eigensolver: {e}")))?;
    // lax hands back the conjugate of the eigenvector matrix; undo that so
    // columns satisfy A u = w u (pinned by tests against hand examples)
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Full SVD of a real matrix, singular values descending.
pub(crate) fn svd_real(a: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (u, s, vt) = a
        .svd(true, true)
        .map_err(|e| Error::DecompositionFailure(format!("{e}")))?;
    Ok((
        u.ok_or_else(|| Error::DecompositionFailure("no left vectors".into()))?,
        s,
        vt.ok_or_else(|| Error::DecompositionFailure("no right vectors".into()))?,
    ))
}
