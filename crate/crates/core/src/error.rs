use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha = {alpha} is outside the admissible interval {interval} for dimension {dimension}")]
    Domain {
        alpha: f64,
        dimension: usize,
        interval: &'static str,
    },

    #[error("kernel evaluated at coincident points; use the singular quadrature path")]
    Singular,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),

    #[error("collocation point lies outside the panel (distance {distance:.3e})")]
    PointOutsidePanel { distance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point {point:?} lies on the boundary surface; use the boundary data instead")]
    PointOnSurface { point: [f64; 3] },

    #[error("source evaluator returned a non-finite value {value} at {point:?}")]
    NonFiniteSource { point: [f64; 3], value: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("operator is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("spectral transform left imaginary residue {relative:.3e} (relative)")]
    ImaginaryResidue { relative: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("angular quadrature under-resolved: I(r) decreased from {previous:.6e} to {current:.6e}")]
    Underresolved { previous: f64, current: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("empty mesh")]
    Empty,
    #[error("triangle {triangle} references vertex {index} but only {count} vertices exist")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        count: usize,
    },
    #[error("edge ({0}, {1}) is used by {2} triangles; a watertight surface needs exactly 2")]
    NotWatertight(usize, usize, usize),
    #[error("edge ({0}, {1}) is traversed twice in the same direction; orientation is inconsistent")]
    InconsistentOrientation(usize, usize),
    #[error("triangle {triangle} is degenerate (area {area:.3e})")]
    Degenerate { triangle: usize, area: f64 },
    #[error("surface encloses zero volume")]
    ZeroVolume,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
