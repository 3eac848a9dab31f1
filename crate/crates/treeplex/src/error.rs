//! Error type shared by all mesh operations.

use crate::plex::PointId;
use thiserror::Error;

/// Errors raised by mesh construction, queries and assembly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0} is outside the chart")]
    OutOfChart(PointId),
    #[error("cone of point {point} crosses more than one stratum (target {target})")]
    DepthViolation { point: PointId, target: PointId },
    #[error("cone index {index} is outside the chart")]
    DanglingPoint { index: usize },
    #[error("orientation code {code} is invalid for a cone entry with {arity} vertices")]
    InvalidOrientation { code: i32, arity: usize },
    #[error("stratum selector {0} out of range")]
    BadStratum(usize),
    #[error("unsupported cell shape: depth {depth} point with cone size {cone_size}")]
    UnsupportedShape { depth: usize, cone_size: usize },
    #[error("no reference tree attached to the mesh")]
    NoReferenceTree,
    #[error("childID {0} has no parent in the reference tree")]
    BadChildId(PointId),
    #[error("cycle detected in the tree overlay at point {0}")]
    CycleDetected(PointId),
    #[error("point {0} has no tree parent")]
    NotConstrained(PointId),
    #[error("unsupported dimension {0}")]
    BadDimension(usize),
    #[error("point {0} is not a child in the reference tree")]
    NotAChild(PointId),
    #[error("evaluation point lies outside the reference cell")]
    PointOutsideCell,
    #[error("degenerate cell {0}: non-positive mapping determinant")]
    DegenerateCell(PointId),
    #[error("element shape does not match the mesh cells")]
    ShapeMismatch,
    #[error("unsupported orientation relation at point {0}")]
    OrientationUnsupported(PointId),
    #[error("childID of point {0} is inconsistent with its mesh parent")]
    InconsistentChildId(PointId),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("point {0} is not a cell")]
    BadCell(PointId),
    #[error("matrix entry ({row}, {col}) lies outside the preallocated sparsity pattern")]
    SparsityViolation { row: usize, col: usize },
    #[error("element field has {found} components, expected {expected}")]
    BadField { expected: usize, found: usize },
    #[error("refinement level cap exceeded")]
    LevelOverflow,
    #[error("forest is not 2:1 balanced")]
    Unbalanced,
    #[error("mesh already carries a tree overlay")]
    AlreadyTreed,
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("unsupported file version: {0}")]
    VersionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
