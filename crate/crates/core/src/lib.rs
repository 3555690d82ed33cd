//! Cost-informed linear dimensionality reduction.
//!
//! The crate fits three linear reductions behind one [`Projection`] type:
//!
//! - PCA on the mean-centred total scatter,
//! - multi-class LDA on the (between, within) scatter pencil,
//! - a cost-informed variant whose between-class scatter is a
//!   misclassification-cost weighted sum of pairwise class scatters, solved
//!   against the total scatter.
//!
//! Around the reducers sit a brute-force KNN classifier, confusion-matrix
//! cost accounting, a seeded synthetic data generator (Gaussian classes with
//! inverse-Wishart covariances) and a replicated experiment harness.

pub mod classify;
pub mod cli;
pub mod costmodel;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod fmt;
pub mod linalg;
pub mod reducers;
pub mod scatter;

pub use classify::{ConfusionMatrix, KnnModel};
pub use costmodel::CostMatrix;
pub use datagen::{GenerativeSpec, RngSeed};
pub use error::{Error, Result};
pub use experiment::{BoxPlotSummary, ExperimentConfig, ReplicationResult, SummaryEntry};
pub use linalg::{EigenResult, Matrix};
pub use reducers::{Method, Projection};
pub use scatter::{Dataset, ScatterSet};
