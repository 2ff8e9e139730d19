use std::path::PathBuf;

use thiserror::Error;

use crate::metric::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("distance matrix has {got} labels for {expected} rows")]
    LabelCount { got: usize, expected: usize },

    #[error("not a metric space: {0}")]
    InvalidMetric(ValidationReport),

    #[error("empty set given for {0}; only nonempty sets are admitted")]
    EmptySet(&'static str),

    #[error("index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty image at x={x}")]
    EmptyImage { x: usize },

    #[error("pair ({x}, {y}) has its source outside the domain of definition")]
    OutsideSupport { x: usize, y: usize },

    #[error("{what} is not contained in {within}")]
    NotSubset { what: &'static str, within: &'static str },

    #[error("space mismatch: {0}")]
    SpaceMismatch(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("subsets are not disjoint; both contain point {0}")]
    NotDisjoint(usize),

    #[error("clopen set must be a nonempty proper subset")]
    TrivialClopen,

    #[error("set is not a union of components at gap {gap}: component {component:?} is split")]
    NotClopen { gap: f64, component: Vec<usize> },

    #[error("not discretely continuous: edge ({from}, {to}) has residue distance {distance} > {bound}")]
    StepTooLong { from: usize, to: usize, distance: usize, bound: usize },

    #[error("malformed disk: {0}")]
    MalformedDisk(String),

    #[error("search space of {search_space} leaves exceeds the exhaustive limit of {limit}")]
    ResolutionTooLarge { search_space: u128, limit: u128 },

    #[error("construction guarantee violated: {0}")]
    GuaranteeViolated(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
