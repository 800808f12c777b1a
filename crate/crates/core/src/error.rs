use thiserror::Error;

use crate::embedding::Embedding;
use crate::mesh::Edge;
use crate::polygon::PolygonError;
use crate::sparse::SolveError;
use crate::validate::ValidityReport;

/// Errors from weight handling, system assembly and the embedding solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("weight on edge {from} -> {to} is not positive ({value})")]
    NonPositiveWeight { from: usize, to: usize, value: f64 },
    #[error("no weight given for edge {from} -> {to}")]
    MissingWeight { from: usize, to: usize },
    #[error("weight for edge {from} -> {to} given twice")]
    DuplicateWeight { from: usize, to: usize },
    #[error("{from} -> {to} is not an edge")]
    NotAnEdge { from: usize, to: usize },
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("boundary polygon is not convex (reflex vertices {reflex:?}); use the star-shaped solver")]
    BoundaryNotConvex { reflex: Vec<usize> },
    #[error("linear solve failed: {0}")]
    SolveFailed(#[from] SolveError),
    #[error("epsilon {0} is outside the open interval (0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("triangulation has dividing edges {0:?}")]
    DividingEdgePresent(Vec<Edge>),
    #[error("boundary vertex {0} has degree 2")]
    DegreeTwoBoundaryVertex(usize),
    #[error("triangulation has no interior vertices")]
    NoInteriorVertices,
    #[error("boundary polygon is not strictly star-shaped")]
    NotStarShaped,
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error("{n} interior vertices exceed the dense eigensolver budget of {budget}")]
    BudgetExceeded { n: usize, budget: usize },
    #[error("no valid embedding after {halvings} halvings (last epsilon {epsilon:e})")]
    HalvingExhausted {
        halvings: u32,
        epsilon: f64,
        last: Box<Embedding>,
        report: Box<ValidityReport>,
    },
}
