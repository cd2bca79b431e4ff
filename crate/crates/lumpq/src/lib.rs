//! Identification of (approximate) lumpings and metastable states of finite
//! Markov chains via the self-adjoint invariance matrix
//! `Q(λ) = (P − λI)†(P − λI)`, benchmarked against spectral and clustering
//! baselines on seeded families of block-structured random chains.
//!
//! The crate splits into:
//! - [`markov`]: transition matrices, partitions, lumping, residuals, spectra
//! - [`io`]: Matrix Market matrices and partition CSV files
//! - [`generate`]: the three planted-instance families and the mixer
//! - [`invariance`]: `Q(λ)` and its self-adjoint eigendecomposition
//! - [`cluster`]: deterministic seeded k-means over spectral embeddings
//! - [`methods`]: the Q-method pipelines and the four baselines
//! - [`metrics`]: normalized waiting time τ and residual Δ
//! - [`sweep`]: the reproducible benchmark harness behind the CLI

pub mod cluster;
pub mod error;
pub mod generate;
pub mod invariance;
pub mod io;
mod linalg;
pub mod markov;
pub mod methods;
pub mod metrics;
pub mod numeric;
pub mod sweep;

pub use error::{Error, Result};
pub use linalg::limit_lapack_threads;
