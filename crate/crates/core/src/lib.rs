//! Sparse-graph computation engine.
//!
//! The crate is organised around a compressed-sparse-row [`graph::Graph`] and a
//! real-valued [`sparse::SparseOperator`] produced from it by normalization
//! recipes. On top of those sit:
//!
//! - [`operators`]: diffusion-operator families (normalized adjacency powers,
//!   personalized PageRank, triangle-induced adjacency) and one-shot
//!   precomputation of concatenated feature banks,
//! - [`fp`]: feature propagation for missing-feature imputation, its dense
//!   harmonic closed form, Dirichlet energy and simple imputation baselines,
//! - [`homophily`]: node homophily, compatibility matrices and effective
//!   homophily over 1- and 2-hop operator sets,
//! - [`wl`]: color-refinement variants for directed graphs and pairwise
//!   distinguishability tests,
//! - [`spectral`]: a dense Jacobi eigensolver, Laplacian positional encodings
//!   and graph Fourier coefficients,
//! - [`synth`]: seeded synthetic graph/feature/mask generators,
//! - [`learn`]: a manually differentiated linear readout over feature banks
//!   with full-batch adaptive-moment training, plus the two experiment
//!   drivers.

pub mod dense;
pub mod error;
pub mod fp;
pub mod graph;
pub mod homophily;
pub mod learn;
pub mod normalize;
pub mod operators;
pub mod solve;
pub mod sparse;
pub mod spectral;
pub mod synth;
pub mod wl;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use fp::{FeatureMask, ImputationResult};
pub use graph::Graph;
pub use homophily::LabelVector;
pub use normalize::NormScheme;
pub use operators::{FeatureBank, OperatorSpec};
pub use sparse::SparseOperator;
