//! The invariance matrix `Q(λ) = (P − λI)†(P − λI)` and its self-adjoint
//! eigendecomposition.
//!
//! `Q(λ)` is positive semi-definite for any shift; its near-kernel vectors
//! are the near-invariant directions of `P`. For a unit vector `u`,
//! `u†Q(λ)u = ‖(P − λI)u‖₂²`, which is what makes the decomposition stable
//! where the eigenproblem of a non-reversible `P` is not. A real shift keeps
//! everything in real symmetric arithmetic; a complex shift produces a
//! complex Hermitian matrix.

use ndarray::{s, Array1, Array2, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::markov::TransitionMatrix;

/// Complex spectral shift λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralShift {
    value: Complex64,
}

impl SpectralShift {
    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite shift {value}")));
        }
        Ok(Self { value })
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

#[derive(Debug, Clone)]
enum QData {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

/// Self-adjoint matrix `Q(λ)`, explicitly (Hermitian-)symmetrized after
/// assembly so `‖Q − Q†‖_max` is exactly zero.
#[derive(Debug, Clone)]
pub struct InvarianceMatrix {
    shift: SpectralShift,
    data: QData,
}

/// Caches `PᵀP` so that many shifts on the same matrix assemble in O(n²).
pub struct InvarianceBuilder {
    p: Array2<f64>,
    ptp: Array2<f64>,
}

impl InvarianceBuilder {
    pub fn new(p: &TransitionMatrix) -> Self {
        let ptp = p.entries().t().dot(p.entries());
        Self { p: p.entries().clone(), ptp }
    }

    pub fn build(&self, shift: SpectralShift) -> InvarianceMatrix {
        let n = self.p.nrows();
        let lam = shift.value();
        if shift.is_real() {
            let l = lam.re;
            // Q = PᵀP − λ(P + Pᵀ) + λ²I
            let mut q = self.ptp.clone();
            q.scaled_add(-l, &self.p);
            q.scaled_add(-l, &self.p.t());
            for i in 0..n {
                q[(i, i)] += l * l;
            }
            // exact symmetrization
            for i in 0..n {
                for j in (i + 1)..n {
                    let avg = 0.5 * (q[(i, j)] + q[(j, i)]);
                    q[(i, j)] = avg;
                    q[(j, i)] = avg;
                }
            }
            InvarianceMatrix { shift, data: QData::Real(q) }
        } else {
            let l2 = lam.norm_sqr();
            let mut q = Array2::<Complex64>::zeros((n, n));
            let lc = lam.conj();
            for i in 0..n {
                for j in 0..n {
                    let mut z = Complex64::new(self.ptp[(i, j)], 0.0);
                    z -= lc * self.p[(i, j)];
                    z -= lam * self.p[(j, i)];
                    if i == j {
                        z += l2;
                    }
                    q[(i, j)] = z;
                }
            }
            // exact Hermitian symmetrization
            for i in 0..n {
                q[(i, i)] = Complex64::new(q[(i, i)].re, 0.0);
                for j in (i + 1)..n {
                    let avg = 0.5 * (q[(i, j)] + q[(j, i)].conj());
                    q[(i, j)] = avg;
                    q[(j, i)] = avg.conj();
                }
            }
            InvarianceMatrix { shift, data: QData::Complex(q) }
        }
    }
}

/// Assembles `Q(λ) = P†P − λ*P − λP† + |λ|²I` for one shift.
pub fn build_invariance_matrix(p: &TransitionMatrix, shift: SpectralShift) -> InvarianceMatrix {
    InvarianceBuilder::new(p).build(shift)
}

impl InvarianceMatrix {
    pub fn dim(&self) -> usize {
        match &self.data {
            QData::Real(q) => q.nrows(),
            QData::Complex(q) => q.nrows(),
        }
    }

    pub fn shift(&self) -> SpectralShift {
        self.shift
    }

    pub fn is_real(&self) -> bool {
        matches!(self.data, QData::Real(_))
    }

    pub fn as_complex(&self) -> Array2<Complex64> {
        match &self.data {
            QData::Real(q) => q.mapv(|x| Complex64::new(x, 0.0)),
            QData::Complex(q) => q.clone(),
        }
    }

    /// `‖Q − Q†‖_max`; zero by construction, exposed for verification.
    pub fn max_asymmetry(&self) -> f64 {
        let q = self.as_complex();
        let n = q.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((q[(i, j)] - q[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// The quadratic form `u†Qu` (real for Hermitian `Q`).
    pub fn quadratic_form(&self, u: ArrayView1<Complex64>) -> f64 {
        let q = self.as_complex();
        let qu = q.dot(&u);
        u.iter().zip(qu.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Full ascending eigendecomposition of a self-adjoint matrix. Columns are
/// unit vectors, phase-fixed so the first significant component is real and
/// positive; exactly tied eigenvalues are ordered by descending lexicographic
/// comparison of their gauge-fixed vectors.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    eigenvalues: Array1<f64>,
    vectors: Array2<Complex64>,
}

impl EigenBasis {
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &Array2<Complex64> {
        &self.vectors
    }

    /// Real parts of the eigenvector block, valid when the source was real
    /// symmetric (imaginary parts are identically zero).
    pub fn real_vectors(&self) -> Array2<f64> {
        self.vectors.mapv(|z| z.re)
    }
}

const GAUGE_TOL: f64 = 1e-12;

fn gauge_fix_complex(vectors: &mut Array2<Complex64>) {
    for mut col in vectors.columns_mut() {
        if let Some(idx) = col.iter().position(|z| z.norm() > GAUGE_TOL) {
            let z = col[idx];
            let phase = z.conj() / z.norm();
            if (phase - Complex64::new(1.0, 0.0)).norm() > 0.0 {
                col.mapv_inplace(|w| w * phase);
            }
            // pin the pivot exactly real
            let pivot = col[idx];
            col[idx] = Complex64::new(pivot.norm(), 0.0);
        }
    }
}

fn gauge_fix_real(vectors: &mut Array2<f64>) {
    for mut col in vectors.columns_mut() {
        if let Some(idx) = col.iter().position(|x| x.abs() > GAUGE_TOL) {
            if col[idx] < 0.0 {
                col.mapv_inplace(|x| -x);
            }
        }
    }
}

/// Descending lexicographic order on (re, im) pairs down a column.
fn lex_desc(a: ArrayView1<Complex64>, b: ArrayView1<Complex64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

fn reorder_ties(eigenvalues: &mut Array1<f64>, vectors: &mut Array2<Complex64>) {
    let n = eigenvalues.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] == eigenvalues[start] {
            end += 1;
        }
        if end - start > 1 {
            let mut order: Vec<usize> = (start..end).collect();
            order.sort_by(|&a, &b| lex_desc(vectors.column(a), vectors.column(b)));
            let block = vectors.slice(s![.., start..end]).to_owned();
            for (dst, &src) in order.iter().enumerate() {
                vectors
                    .column_mut(start + dst)
                    .assign(&block.column(src - start));
            }
        }
        start = end;
    }
}

/// Ascending self-adjoint eigendecomposition with the deterministic gauge.
pub fn self_adjoint_eigs(q: &InvarianceMatrix) -> Result<EigenBasis> {
    match &q.data {
        QData::Real(m) => {
            let (vals, mut vecs) = linalg::eigh_real(m)?;
            gauge_fix_real(&mut vecs);
            let mut eigenvalues = vals;
            let mut vectors = vecs.mapv(|x| Complex64::new(x, 0.0));
            reorder_ties(&mut eigenvalues, &mut vectors);
            Ok(EigenBasis { eigenvalues, vectors })
        }
        QData::Complex(m) => {
            let (vals, mut vecs) = linalg::eigh_complex(m)?;
            gauge_fix_complex(&mut vecs);
            let mut eigenvalues = vals;
            reorder_ties(&mut eigenvalues, &mut vecs);
            Ok(EigenBasis { eigenvalues, vectors: vecs })
        }
    }
}

/// The `k` smallest eigenpairs of `Q`, in the same gauge and order as
/// [`self_adjoint_eigs`].
pub fn smallest_eigenpairs(
    q: &InvarianceMatrix,
    k: usize,
) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let n = q.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let basis = self_adjoint_eigs(q)?;
    Ok((
        basis.eigenvalues().slice(s![..k]).to_owned(),
        basis.vectors().slice(s![.., ..k]).to_owned(),
    ))
}
