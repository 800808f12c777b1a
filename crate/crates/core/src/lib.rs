//! Straight-line embeddings of triangulated disks with a fixed boundary
//! polygon.
//!
//! * [`tutte`]: convex-combination (Tutte) embeddings for convex boundaries.
//! * [`star`]: ε-weighted energy embeddings for strictly star-shaped
//!   boundaries, found by halving ε until the result validates.
//! * [`validate`]: certificates for any candidate embedding.
//! * [`quad`]: projective homotopies for quadrilaterals with one reflex
//!   vertex.
//! * [`io`] and [`svg`]: documents and figures.

pub mod embedding;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod io;
pub mod mesh;
pub mod polygon;
pub mod problem;
pub mod quad;
pub mod sparse;
pub mod star;
pub mod svg;
pub mod tutte;
pub mod validate;

pub use embedding::{Embedding, Method, SolverInfo};
pub use error::EmbedError;
pub use mesh::{Edge, MeshError, Triangulation};
pub use polygon::{BoundaryPolygon, EyeCoefficients, KernelPolygon, Point, PolygonError, Vector};
pub use problem::{Problem, ProblemError};
pub use quad::{ProjectiveTransform, QuadError, QuadInstance};
pub use star::{star_embed, StarOptions};
pub use tutte::{tutte_embed, Certified, RawWeights, WeightScheme};
pub use validate::{validate, ValidityReport};
