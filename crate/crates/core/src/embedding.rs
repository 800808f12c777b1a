//! Vertex placements of a triangulation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mesh::Triangulation;
use crate::polygon::Point;

/// How an embedding was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tutte,
    Epsilon,
    Transported,
    Given,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub method: Method,
    /// Relative residual `|Mx - b| / |b|` of the solve.
    pub residual: Option<f64>,
    /// Residual tolerance the solve was held to.
    pub tolerance: Option<f64>,
    pub epsilon: Option<f64>,
    pub halvings: Option<u32>,
}

impl SolverInfo {
    pub fn given() -> Self {
        Self {
            method: Method::Given,
            residual: None,
            tolerance: None,
            epsilon: None,
            halvings: None,
        }
    }
}

/// Coordinates for every vertex of a triangulation, indexed by vertex id.
/// Edges are the straight segments between their endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    triangulation: Arc<Triangulation>,
    coords: Vec<Point>,
    pub info: SolverInfo,
}

impl Embedding {
    /// # Panics
    /// If `coords` does not have one entry per vertex.
    pub fn new(triangulation: Arc<Triangulation>, coords: Vec<Point>, info: SolverInfo) -> Self {
        assert_eq!(
            coords.len(),
            triangulation.vertex_count(),
            "one coordinate per vertex"
        );
        Self {
            triangulation,
            coords,
            info,
        }
    }

    pub fn triangulation(&self) -> &Arc<Triangulation> {
        &self.triangulation
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn position(&self, v: usize) -> Point {
        self.coords[v]
    }

    /// Interior vertex positions in system order.
    pub fn interior_positions(&self) -> Vec<Point> {
        self.triangulation
            .interior_vertices()
            .iter()
            .map(|&v| self.coords[v])
            .collect()
    }

    /// Boundary positions in cycle order.
    pub fn boundary_positions(&self) -> Vec<Point> {
        self.triangulation
            .boundary_cycle()
            .iter()
            .map(|&v| self.coords[v])
            .collect()
    }

    /// Largest vertex displacement between two embeddings of the same
    /// triangulation.
    pub fn max_displacement(&self, other: &Embedding) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
