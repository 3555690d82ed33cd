use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("class {0} has no datapoints")]
    EmptyClass(usize),

    #[error("pairwise scatter needs two distinct classes, got {0} twice")]
    SameClass(usize),

    #[error("label {label} at row {row} is outside 0..{class_count}")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        class_count: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("cost matrix is {got}x{got} but the data has {expected} classes")]
    CostShapeMismatch { expected: usize, got: usize },

    #[error("separability is undefined for a zero direction")]
    ZeroDirection,

    #[error("target dimension {requested} is outside 1..={available}")]
    BadTargetDim { requested: usize, available: usize },

    #[error("negative cost {value} at ({row}, {col})")]
    NegativeCost { row: usize, col: usize, value: f64 },

    #[error("nonzero diagonal cost {value} at ({index}, {index})")]
    NonzeroDiagonal { index: usize, value: f64 },

    #[error("cost matrix is not square: {0}")]
    NotSquare(String),

    #[error("confusion matrix has {confusion} classes but cost matrix has {costs}")]
    ShapeMismatch { confusion: usize, costs: usize },

    #[error("inverse-Wishart degrees of freedom {dof} must exceed {min}")]
    BadDof { dof: f64, min: f64 },

    #[error("class {class} has {available} points, need at least {required}")]
    InsufficientClassData {
        class: usize,
        available: usize,
        required: usize,
    },

    #[error("cannot summarize an empty list")]
    EmptyInput,

    #[error("invalid neighbour count k={k} for {n_train} training points")]
    InvalidNeighbourCount { k: usize, n_train: usize },

    #[error("method cost-informed requires a cost matrix (--costs)")]
    MissingCostMatrix,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("replication {id} failed: {source}")]
    Replication {
        id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        line: u64,
        column: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            column,
            message: message.into(),
        }
    }
}
