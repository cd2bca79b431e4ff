//! Deterministic seeded k-means over the rows of a spectral embedding.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::markov::Partition;

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 100;

/// One point per state: eigenvector components, with complex columns split
/// into two real coordinates each (Re then Im).
#[derive(Debug, Clone)]
pub struct Embedding {
    points: Array2<f64>,
}

impl Embedding {
    pub fn from_real_columns(cols: ArrayView2<f64>) -> Self {
        // force standard (row-major) layout whatever the source strides
        let (n, k) = cols.dim();
        let mut points = Array2::zeros((n, k));
        points.assign(&cols);
        Self { points }
    }

    pub fn from_complex_columns(cols: ArrayView2<Complex64>) -> Self {
        let (n, k) = cols.dim();
        let mut points = Array2::zeros((n, 2 * k));
        for j in 0..k {
            for i in 0..n {
                points[(i, 2 * j)] = cols[(i, j)].re;
                points[(i, 2 * j + 1)] = cols[(i, j)].im;
            }
        }
        Self { points }
    }

    pub fn n_points(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }
}

fn dist_sq(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn count_distinct(points: &Array2<f64>) -> usize {
    let n = points.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = points.row(a);
        let rb = points.row(b);
        for (x, y) in ra.iter().zip(rb.iter()) {
            let ord = x.total_cmp(y);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });
    let mut distinct = if n > 0 { 1 } else { 0 };
    for w in order.windows(2) {
        if points.row(w[0]) != points.row(w[1]) {
            distinct += 1;
        }
    }
    distinct
}

struct LloydOutcome {
    labels: Vec<usize>,
    wcss: f64,
    objective_trace: Vec<f64>,
}

fn lloyd_once(
    points: &Array2<f64>,
    k: usize,
    rng: &mut ChaCha8Rng,
    max_iter: usize,
) -> LloydOutcome {
    let n = points.nrows();
    let d = points.ncols();

    // k-means++ seeding
    let mut centers = Array2::<f64>::zeros((k, d));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| dist_sq(points.row(i), centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).assign(&points.row(pick));
        for i in 0..n {
            let nd = dist_sq(points.row(i), centers.row(c));
            if nd < d2[i] {
                d2[i] = nd;
            }
        }
    }

    let mut labels = vec![0usize; n];
    let mut objective_trace = Vec::new();
    for _ in 0..max_iter {
        // assignment step, ties to the lowest center index
        let mut changed = false;
        let mut dist_to_own = vec![0.0f64; n];
        for i in 0..n {
            let row = points.row(i);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let dc = dist_sq(row, centers.row(c));
                if dc < best_d {
                    best_d = dc;
                    best = c;
                }
            }
            if labels[i] != best {
                changed = true;
                labels[i] = best;
            }
            dist_to_own[i] = best_d;
        }
        // reseed emptied clusters to the farthest point
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] == 0 {
                // donor cluster must keep at least one point
                let far = dist_to_own
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| counts[labels[*i]] > 1)
                    .max_by(|(ia, a), (ib, b)| a.total_cmp(b).then(ib.cmp(ia)))
                    .map(|(i, _)| i)
                    .unwrap();
                counts[labels[far]] -= 1;
                labels[far] = c;
                counts[c] = 1;
                centers.row_mut(c).assign(&points.row(far));
                dist_to_own[far] = 0.0;
                changed = true;
            }
        }
        objective_trace.push(dist_to_own.iter().sum());
        if !changed && objective_trace.len() > 1 {
            break;
        }
        // update step
        centers.fill(0.0);
        for i in 0..n {
            let mut c = centers.row_mut(labels[i]);
            c += &points.row(i);
        }
        for c in 0..k {
            let mut row = centers.row_mut(c);
            row /= counts[c] as f64;
        }
    }
    let wcss = (0..n)
        .map(|i| dist_sq(points.row(i), centers.row(labels[i])))
        .sum();
    LloydOutcome { labels, wcss, objective_trace }
}

fn kmeans_inner(
    e: &Embedding,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<(Partition, Vec<f64>)> {
    let n = e.n_points();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if restarts == 0 || max_iter == 0 {
        return Err(Error::InvalidParameter("restarts and max_iter must be at least 1".into()));
    }
    if count_distinct(e.points()) < k {
        return Err(Error::DegenerateInput);
    }
    let mut best: Option<LloydOutcome> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let run = lloyd_once(e.points(), k, &mut rng, max_iter);
        let better = match &best {
            None => true,
            Some(b) => run.wcss < b.wcss, // ties keep the lower restart index
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.unwrap();
    let partition = Partition::new(best.labels, k)?.canonicalize();
    Ok((partition, best.objective_trace))
}

/// Lloyd iterations from k-means++ seeding; the best of `restarts` runs by
/// within-cluster sum of squares. Labels are canonicalized by first
/// occurrence, all `k` clusters are non-empty.
pub fn kmeans(
    e: &Embedding,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<Partition> {
    kmeans_inner(e, k, seed, restarts, max_iter).map(|(p, _)| p)
}
