use crate::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("triangle {triangle}: vertex index out of range ({index} >= {count})")]
    IndexOutOfRange { triangle: usize, index: usize, count: usize },

    #[error("triangle {triangle}: repeated vertex index")]
    RepeatedVertex { triangle: usize },

    #[error("triangle {triangle} duplicates triangle {other}")]
    DuplicateTriangle { triangle: usize, other: usize },

    #[error("triangle {triangle} has zero area")]
    ZeroArea { triangle: usize },

    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),

    #[error("hanging vertex {vertex} lies on an edge of triangle {triangle}")]
    HangingVertex { vertex: usize, triangle: usize },

    #[error("degenerate triangle")]
    DegenerateTriangle,

    #[error("edge {0} is a boundary edge")]
    BoundaryEdge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point ({}, {}) lies outside the mesh", .0[0], .0[1])]
    Outside(Point),

    #[error("D' must exceed D (D = {degree}, D' = {colloc_degree})")]
    CollocationDegree { degree: usize, colloc_degree: usize },

    #[error("non-finite value of {what} at ({}, {})", .at[0], .at[1])]
    NonFinite { what: &'static str, at: Point },

    #[error("zero trace of the coefficient matrix at ({}, {})", .0[0], .0[1])]
    ZeroTrace(Point),

    #[error("zero coefficient norm at ({}, {})", .0[0], .0[1])]
    ZeroCoefficients(Point),

    #[error("operator coefficients are not symmetric at ({}, {})", .0[0], .0[1])]
    NotSymmetric(Point),

    #[error("consistency condition violated: normal matrix is not positive definite (estimated rank deficiency: {})",
        .rank_deficiency.map_or_else(|| "unknown".to_string(), |r| r.to_string()))]
    ConsistencyViolated { rank_deficiency: Option<usize> },

    #[error("singular saddle-point system (rank {rank} of {dim})")]
    SingularSaddle { rank: usize, dim: usize },

    #[error("non-finite iterate at iteration {0}")]
    Diverged(usize),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("{0}")]
    Config(String),
}
