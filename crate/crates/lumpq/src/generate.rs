//! Seeded random constructors for the three families of block-structured
//! test matrices, plus the convex mixing operator used to perturb them.
//!
//! All randomness flows through `ChaCha8Rng`; identical `(config, seed)`
//! yields bitwise-identical matrices regardless of what else ran before.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::markov::{Partition, TransitionMatrix};

/// Which of the three test-matrix families to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorClass {
    /// `P = (1−ε)B + εA` with block-diagonal `B` (metastable states).
    BlockDiag,
    /// Sparse binary mask: within-block density δ, between-block density ε.
    SparseMasked,
    /// Block-stochastic `P̃_ij · a_ij`: exactly lumpable by construction.
    BlockStoch,
}

impl GeneratorClass {
    pub fn token(self) -> &'static str {
        match self {
            GeneratorClass::BlockDiag => "blockdiag",
            GeneratorClass::SparseMasked => "sparse",
            GeneratorClass::BlockStoch => "blockstoch",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "blockdiag" => Ok(GeneratorClass::BlockDiag),
            "sparse" => Ok(GeneratorClass::SparseMasked),
            "blockstoch" => Ok(GeneratorClass::BlockStoch),
            other => Err(Error::InvalidConfig(format!("unknown generator class `{other}`"))),
        }
    }
}

/// Shape and noise parameters for one planted instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub block_sizes: Vec<usize>,
    /// Mixing strength (BlockDiag, BlockStoch) or between-block density (SparseMasked).
    pub epsilon: f64,
    /// Within-block density; SparseMasked only.
    pub delta: Option<f64>,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(
        n: usize,
        block_sizes: Vec<usize>,
        epsilon: f64,
        delta: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        if block_sizes.len() < 2 {
            return Err(Error::InvalidConfig("need at least 2 blocks".into()));
        }
        if block_sizes.iter().any(|&s| s < 2) {
            return Err(Error::InvalidConfig("every block needs at least 2 states".into()));
        }
        if block_sizes.iter().sum::<usize>() != n {
            return Err(Error::InvalidConfig(format!(
                "block sizes sum to {}, expected n = {n}",
                block_sizes.iter().sum::<usize>()
            )));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidConfig(format!("epsilon {epsilon} outside [0, 1]")));
        }
        if let Some(d) = delta {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidConfig(format!("delta {d} outside [0, 1]")));
            }
            if d < epsilon {
                return Err(Error::InvalidConfig(format!(
                    "delta {d} must be at least epsilon {epsilon}"
                )));
            }
        }
        Ok(Self { n, block_sizes, epsilon, delta, seed })
    }

    pub fn m(&self) -> usize {
        self.block_sizes.len()
    }

    /// Flat `key=value` provenance block for benchmark CSV headers.
    pub fn provenance(&self) -> String {
        let sizes = self
            .block_sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("+");
        let delta = match self.delta {
            Some(d) => format!("{d}"),
            None => String::new(),
        };
        format!(
            "n={} m={} block_sizes={} epsilon={} delta={} seed={}",
            self.n,
            self.m(),
            sizes,
            self.epsilon,
            delta,
            self.seed
        )
    }

    /// The planted block-membership partition.
    pub fn truth_partition(&self) -> Partition {
        let mut labels = Vec::with_capacity(self.n);
        for (b, &size) in self.block_sizes.iter().enumerate() {
            labels.extend(std::iter::repeat_n(b, size));
        }
        Partition::new(labels, self.m()).expect("block sizes form a valid partition")
    }
}

/// A generated matrix together with the partition used to plant it.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub matrix: TransitionMatrix,
    pub truth: Partition,
    pub config: GeneratorConfig,
}

fn uniform_rows(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::<f64>::zeros((rows, cols));
    for i in 0..rows {
        // A zero row has probability 0; redraw the row if it happens.
        loop {
            let mut sum = 0.0;
            for j in 0..cols {
                let x: f64 = rng.random();
                a[(i, j)] = x;
                sum += x;
            }
            if sum > 0.0 {
                for j in 0..cols {
                    a[(i, j)] /= sum;
                }
                break;
            }
        }
    }
    a
}

/// Dense matrix with i.i.d. uniform [0, 1) entries, each row normalized.
pub fn gen_random_stochastic(n: usize, rng: &mut ChaCha8Rng) -> TransitionMatrix {
    TransitionMatrix::new(uniform_rows(n, n, rng)).expect("normalized rows are stochastic")
}

/// Block sizes for a composition of `n`: the count is drawn from {3, 4, 5}
/// when unspecified, each block gets a floor of `max(2, n/(4m))` states, and
/// the remainder is split by a uniform weak composition (stars and bars).
pub fn sample_block_sizes(
    n: usize,
    m: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let m = match m {
        Some(m) => m,
        None => 3 + rng.random_range(0..3usize),
    };
    if m < 2 {
        return Err(Error::InvalidConfig("need at least 2 blocks".into()));
    }
    let floor = std::cmp::max(2, n / (4 * m));
    if m * floor > n {
        return Err(Error::InvalidConfig(format!(
            "n = {n} too small for {m} blocks of at least {floor} states"
        )));
    }
    let rest = n - m * floor;
    // Uniform weak composition of `rest` into m parts via stars and bars:
    // choose m−1 distinct bar positions among rest+m−1 slots.
    let slots = rest + m - 1;
    let mut bars: Vec<usize> = Vec::with_capacity(m - 1);
    {
        use std::collections::BTreeSet;
        let mut chosen = BTreeSet::new();
        while chosen.len() < m - 1 {
            chosen.insert(rng.random_range(0..slots));
        }
        bars.extend(chosen.iter().copied());
    }
    let mut sizes = Vec::with_capacity(m);
    let mut prev = 0usize;
    for (idx, &b) in bars.iter().enumerate() {
        sizes.push(floor + (b - prev) - if idx == 0 { 0 } else { 1 });
        prev = b;
    }
    // last part
    sizes.push(floor + (slots - prev) - if m > 1 { 1 } else { 0 });
    debug_assert_eq!(sizes.iter().sum::<usize>(), n);
    Ok(sizes)
}

/// Entrywise convex combination `(1−ε)·b + ε·a`. Exact at the endpoints.
pub fn mix(b: &TransitionMatrix, a: &TransitionMatrix, epsilon: f64) -> Result<TransitionMatrix> {
    if b.n() != a.n() {
        return Err(Error::DimensionMismatch(b.n(), a.n()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if epsilon == 0.0 {
        return Ok(b.clone());
    }
    if epsilon == 1.0 {
        return Ok(a.clone());
    }
    let mixed = b.entries() * (1.0 - epsilon) + a.entries() * epsilon;
    TransitionMatrix::new(mixed)
}

/// `P = (1−ε)B + εA` with `B` block-diagonal (per-block uniform stochastic)
/// and `A` fully random. The truth partition is the block membership.
pub fn gen_block_diag_dominant(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> PlantedInstance {
    let n = config.n;
    let mut b = Array2::<f64>::zeros((n, n));
    let mut offset = 0usize;
    for &size in &config.block_sizes {
        let block = uniform_rows(size, size, rng);
        for i in 0..size {
            for j in 0..size {
                b[(offset + i, offset + j)] = block[(i, j)];
            }
        }
        offset += size;
    }
    let b = TransitionMatrix::new(b).expect("block-diagonal rows are stochastic");
    let a = gen_random_stochastic(n, rng);
    let matrix = mix(&b, &a, config.epsilon).expect("same dimensions");
    PlantedInstance {
        matrix,
        truth: config.truth_partition(),
        config: config.clone(),
    }
}

/// Sparse masked family: `P*_ij = χ_ij · B_ij`, `χ_ij ~ Bernoulli(δ)` within
/// blocks and `Bernoulli(ε)` between, rows normalized. The whole matrix is
/// regenerated when any row comes out all-zero, up to 1000 attempts.
pub fn gen_sparse_masked(
    config: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PlantedInstance> {
    let delta = config
        .delta
        .ok_or_else(|| Error::InvalidConfig("sparse class requires delta".into()))?;
    let n = config.n;
    let truth = config.truth_partition();
    let labels = truth.labels().to_vec();
    const ATTEMPTS: usize = 1000;
    for _ in 0..ATTEMPTS {
        let mut raw = Array2::<f64>::zeros((n, n));
        let mut ok = true;
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                let p = if labels[i] == labels[j] { delta } else { config.epsilon };
                let mask = rng.random::<f64>() < p;
                let value: f64 = rng.random();
                if mask {
                    raw[(i, j)] = value;
                    row_sum += value;
                }
            }
            if row_sum <= 0.0 {
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        for i in 0..n {
            let s: f64 = raw.row(i).sum();
            for j in 0..n {
                raw[(i, j)] /= s;
            }
        }
        let matrix = TransitionMatrix::new(raw).expect("normalized rows are stochastic");
        return Ok(PlantedInstance { matrix, truth, config: config.clone() });
    }
    Err(Error::GenerationExhausted(ATTEMPTS))
}

/// Block-stochastic family: draws a reduced matrix `P̃` on the blocks and
/// fills block (i, j) with `P̃_ij · a_ij` where each `a_ij` is row-stochastic.
/// The truth partition is an exact lumping of the result.
pub fn gen_block_stochastic(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> PlantedInstance {
    let n = config.n;
    let m = config.m();
    let p_tilde = uniform_rows(m, m, rng);
    let mut raw = Array2::<f64>::zeros((n, n));
    let mut offsets = Vec::with_capacity(m + 1);
    offsets.push(0usize);
    for &s in &config.block_sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    for bi in 0..m {
        for bj in 0..m {
            let a = uniform_rows(config.block_sizes[bi], config.block_sizes[bj], rng);
            for i in 0..config.block_sizes[bi] {
                for j in 0..config.block_sizes[bj] {
                    raw[(offsets[bi] + i, offsets[bj] + j)] = p_tilde[(bi, bj)] * a[(i, j)];
                }
            }
        }
    }
    let matrix = TransitionMatrix::new(raw).expect("block rows are stochastic");
    PlantedInstance {
        matrix,
        truth: config.truth_partition(),
        config: config.clone(),
    }
}

/// Uniformly random partition of `n` states into exactly `k` non-empty
/// aggregates: a random permutation seeds each aggregate once, remaining
/// states draw labels uniformly.
pub fn random_partition(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Partition> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut labels = vec![0usize; n];
    for (l, &state) in order.iter().take(k).enumerate() {
        labels[state] = l;
    }
    for &state in order.iter().skip(k) {
        labels[state] = rng.random_range(0..k);
    }
    Partition::new(labels, k)
}

/// Everything needed to reproduce one instance from a bare seed.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub class: GeneratorClass,
    pub n: usize,
    /// Block count; `None` resamples from {3, 4, 5} per instance.
    pub m: Option<usize>,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub seed: u64,
}

/// Generates one planted instance. For the block-stochastic class, `epsilon`
/// mixes the exact matrix with an unstructured random one after assembly:
/// `P = (1−ε)B + εA`.
pub fn generate_instance(spec: &InstanceSpec) -> Result<PlantedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(0);
    let sizes = sample_block_sizes(spec.n, spec.m, &mut rng)?;
    match spec.class {
        GeneratorClass::BlockDiag => {
            let config = GeneratorConfig::new(spec.n, sizes, spec.epsilon, None, spec.seed)?;
            Ok(gen_block_diag_dominant(&config, &mut rng))
        }
        GeneratorClass::SparseMasked => {
            let config = GeneratorConfig::new(spec.n, sizes, spec.epsilon, spec.delta, spec.seed)?;
            gen_sparse_masked(&config, &mut rng)
        }
        GeneratorClass::BlockStoch => {
            // epsilon mixes after assembly; the base instance itself is exact.
            let config = GeneratorConfig::new(spec.n, sizes, spec.epsilon, None, spec.seed)?;
            let base = gen_block_stochastic(&config, &mut rng);
            if spec.epsilon == 0.0 {
                return Ok(base);
            }
            let a = gen_random_stochastic(spec.n, &mut rng);
            let matrix = mix(&base.matrix, &a, spec.epsilon)?;
            Ok(PlantedInstance { matrix, truth: base.truth, config })
        }
    }
}
