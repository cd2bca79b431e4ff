//! Core types and exact operations on transition matrices, partitions,
//! lumped chains, stationary distributions, spectra, and the lumpability
//! residual.
//!
//! A partition of the state space is a lumping when the row sums of `P`
//! over each aggregate are constant within every aggregate, equivalently
//! when `P Π = Π P̃` for the indicator matrix `Π`. Both forms are exposed
//! here: [`max_row_deviation`] measures the first, [`commutation_residual`]
//! the second (as a Frobenius norm), and they vanish together.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::numeric::{kahan_sum, spectrum_order};

/// Tolerance for row sums of a stochastic matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Stationary distributions must satisfy `‖vP − v‖∞` below this.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Convergence threshold for successive power-iteration iterates.
const POWER_ITER_TOL: f64 = 1e-13;
/// Aggregates with stationary mass below this cannot be lumped over.
pub const MASS_TOL: f64 = 1e-15;

/// Dense row-stochastic transition matrix. States are 0-indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: Array2<f64>,
}

impl TransitionMatrix {
    /// Validates and wraps a raw matrix: square, at least 2x2, no negative
    /// entries, every row sum within [`ROW_SUM_TOL`] of 1.
    pub fn new(raw: Array2<f64>) -> Result<Self> {
        let (rows, cols) = raw.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::TooSmall);
        }
        for ((i, j), &x) in raw.indexed_iter() {
            if x < 0.0 || x.is_nan() {
                return Err(Error::NegativeEntry { row: i, col: j, value: x });
            }
        }
        for (i, row) in raw.rows().into_iter().enumerate() {
            let sum = kahan_sum(row.iter().copied());
            if (sum - 1.0).abs() >= ROW_SUM_TOL {
                return Err(Error::RowSumViolation { row: i, sum });
            }
        }
        Ok(Self { entries: raw })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// Assignment of `n` states to `k` aggregates. Aggregate ids are dense:
/// every id in `0..k` occurs at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 || k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "partition needs 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        let mut counts = vec![0usize; k];
        for &l in &labels {
            if l >= k {
                return Err(Error::LabelOutOfRange { label: l, k });
            }
            counts[l] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyAggregate(empty));
        }
        Ok(Self { labels, k })
    }

    /// Infers `k` as the largest label plus one.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Self::new(labels, k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// The n x k indicator matrix: `Π[i, l] = 1` iff state `i` is in aggregate `l`.
    pub fn to_indicator(&self) -> Array2<f64> {
        let mut ind = Array2::zeros((self.n(), self.k));
        for (i, &l) in self.labels.iter().enumerate() {
            ind[(i, l)] = 1.0;
        }
        ind
    }

    /// Relabels aggregates in order of first occurrence, so that two
    /// partitions inducing the same equivalence relation compare equal.
    pub fn canonicalize(&self) -> Partition {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0usize;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Partition { labels, k: self.k }
    }

    pub fn members(&self, aggregate: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == aggregate)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Left fixed point of a transition matrix: `vP = v`, entries summing to 1.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    weights: Array1<f64>,
}

impl StationaryDistribution {
    /// Wraps explicit weights: non-negative, summing to 1 within 1e-12.
    /// Useful for reductions with a weighting other than the chain's own
    /// stationary distribution.
    pub fn from_weights(weights: Array1<f64>) -> Result<Self> {
        if let Some((i, &w)) = weights.indexed_iter().find(|(_, &w)| w < 0.0 || w.is_nan()) {
            return Err(Error::InvalidParameter(format!("weight {w} at index {i}")));
        }
        let sum = kahan_sum(weights.iter().copied());
        if (sum - 1.0).abs() >= ROW_SUM_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Reduced k x k transition matrix together with the aggregated stationary
/// weights it was built from.
#[derive(Debug, Clone)]
pub struct LumpedChain {
    p_tilde: Array2<f64>,
    aggregate_mass: Array1<f64>,
}

impl LumpedChain {
    pub fn p_tilde(&self) -> &Array2<f64> {
        &self.p_tilde
    }

    pub fn aggregate_mass(&self) -> &Array1<f64> {
        &self.aggregate_mass
    }

    pub fn k(&self) -> usize {
        self.p_tilde.nrows()
    }

    /// Reinterprets the reduced matrix as a chain in its own right.
    /// Fails for the trivial one-aggregate lumping (a 1x1 matrix).
    pub fn to_transition_matrix(&self) -> Result<TransitionMatrix> {
        TransitionMatrix::new(self.p_tilde.clone())
    }
}

/// All eigenvalues of a transition matrix, sorted by descending modulus with
/// ties broken by descending real part, then descending imaginary part.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
}

impl Spectrum {
    fn new(mut eigenvalues: Vec<Complex64>) -> Result<Self> {
        eigenvalues.sort_by(spectrum_order);
        let near_one = eigenvalues
            .iter()
            .any(|e| (e - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        if !near_one {
            return Err(Error::EigenFailure(
                "no eigenvalue within 1e-10 of 1 (Perron-Frobenius violated)".into(),
            ));
        }
        if let Some(bad) = eigenvalues.iter().find(|e| e.norm() > 1.0 + 1e-10) {
            return Err(Error::EigenFailure(format!(
                "eigenvalue {bad} has modulus above 1 + 1e-10"
            )));
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }
}

/// Validates a raw matrix as row-stochastic. Alias for [`TransitionMatrix::new`].
pub fn validate_stochastic(raw: Array2<f64>) -> Result<TransitionMatrix> {
    TransitionMatrix::new(raw)
}

/// Stationary distribution by power iteration from the uniform vector.
///
/// Converges when successive iterates differ by less than 1e-13 in the
/// infinity norm; gives up after `100 * n` iterations (periodic or otherwise
/// non-mixing chains). For reducible chains this returns the limit reached
/// from the uniform start.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    let n = p.n();
    let mut v = Array1::from_elem(n, 1.0 / n as f64);
    let cap = 100 * n;
    for _ in 0..cap {
        let mut w = v.dot(p.entries());
        let s = kahan_sum(w.iter().copied());
        w.mapv_inplace(|x| x / s);
        let diff = w
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if diff < POWER_ITER_TOL {
            // v itself satisfies ‖vP − v‖∞ = diff < 1e-13
            return Ok(StationaryDistribution { weights: v });
        }
        v = w;
    }
    Err(Error::NoConvergence(cap))
}

fn check_consistent(p: &TransitionMatrix, pi: &Partition) -> Result<()> {
    if p.n() != pi.n() {
        return Err(Error::DimensionMismatch(p.n(), pi.n()));
    }
    Ok(())
}

/// Source-mass-weighted reduced transition matrix:
/// `P̃[k, l] = Σ_{i∈L_k} v_i (Σ_{j∈L_l} P[i, j]) / Σ_{i∈L_k} v_i`.
///
/// When the partition is an exact lumping this reproduces the constant
/// per-aggregate row sums exactly, independent of `v`.
pub fn lump(
    p: &TransitionMatrix,
    pi: &Partition,
    v: &StationaryDistribution,
) -> Result<LumpedChain> {
    check_consistent(p, pi)?;
    if v.len() != p.n() {
        return Err(Error::DimensionMismatch(p.n(), v.len()));
    }
    let k = pi.k();
    let ppi = p.entries().dot(&pi.to_indicator()); // n x k row sums over aggregates
    let mut mass = Array1::<f64>::zeros(k);
    for (i, &l) in pi.labels().iter().enumerate() {
        mass[l] += v.weights()[i];
    }
    for (l, &m) in mass.iter().enumerate() {
        if m < MASS_TOL {
            return Err(Error::ZeroAggregateMass(l));
        }
    }
    let mut p_tilde = Array2::<f64>::zeros((k, k));
    for (i, &kk) in pi.labels().iter().enumerate() {
        let w = v.weights()[i];
        for l in 0..k {
            p_tilde[(kk, l)] += w * ppi[(i, l)];
        }
    }
    for kk in 0..k {
        for l in 0..k {
            p_tilde[(kk, l)] /= mass[kk];
        }
    }
    Ok(LumpedChain { p_tilde, aggregate_mass: mass })
}

/// Commutation residual with a caller-supplied stationary distribution.
/// `Δ = ‖PΠ − ΠP̃‖_F` where `P̃` comes from [`lump`].
pub fn commutation_residual_with(
    p: &TransitionMatrix,
    pi: &Partition,
    v: &StationaryDistribution,
) -> Result<f64> {
    let lumped = lump(p, pi, v)?;
    let ind = pi.to_indicator();
    let ppi = p.entries().dot(&ind);
    let pipt = ind.dot(lumped.p_tilde());
    let sq = ppi
        .iter()
        .zip(pipt.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    Ok(sq.sqrt())
}

/// Deviation from the commutation relation `PΠ = ΠP̃`, in the Frobenius norm.
/// Zero (within 1e-12) exactly when the partition is a lumping.
pub fn commutation_residual(p: &TransitionMatrix, pi: &Partition) -> Result<f64> {
    let v = stationary_distribution(p)?;
    commutation_residual_with(p, pi, &v)
}

/// Largest spread, over aggregate pairs (k, l), of the per-row aggregate sums
/// `Σ_{j∈L_l} P[i, j]` for `i ∈ L_k`. Zero iff the partition is an exact lumping.
pub fn max_row_deviation(p: &TransitionMatrix, pi: &Partition) -> Result<f64> {
    check_consistent(p, pi)?;
    let k = pi.k();
    let ppi = p.entries().dot(&pi.to_indicator());
    let mut worst = 0.0f64;
    for agg in 0..k {
        let rows = pi.members(agg);
        for l in 0..k {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in &rows {
                lo = lo.min(ppi[(i, l)]);
                hi = hi.max(ppi[(i, l)]);
            }
            worst = worst.max(hi - lo);
        }
    }
    Ok(worst)
}

/// All complex eigenvalues of the (generally non-symmetric) matrix.
pub fn spectrum(p: &TransitionMatrix) -> Result<Spectrum> {
    let vals = linalg::eigvals_general(p.entries())?;
    Spectrum::new(vals.to_vec())
}

/// Right eigenvectors of a transition matrix, paired with its eigenvalues and
/// sorted in spectrum order (descending modulus). Used by the P-eigenvector
/// detection baseline.
pub fn right_eigenpairs(p: &TransitionMatrix) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    let (vals, vecs) = linalg::eig_general(p.entries())?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| spectrum_order(&vals[a], &vals[b]));
    let sorted_vals: Vec<Complex64> = order.iter().map(|&i| vals[i]).collect();
    let n = p.n();
    let mut sorted_vecs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        sorted_vecs.column_mut(dst).assign(&vecs.column(src));
    }
    Ok((sorted_vals, sorted_vecs))
}

/// Infinity-norm residual `‖vP − v‖∞`, used to check stationarity.
pub fn stationarity_residual(p: &TransitionMatrix, v: ArrayView1<f64>) -> f64 {
    let w = v.dot(p.entries());
    w.iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
}
