//! A triangulation paired with the coordinates of its boundary polygon.

use std::sync::Arc;

use thiserror::Error;

use crate::mesh::{MeshError, Triangulation};
use crate::polygon::{signed_area, BoundaryPolygon, Point, PolygonError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error("no coordinate given for boundary vertex {0}")]
    MissingBoundaryCoordinate(usize),
    #[error("vertex {0} is not on the boundary")]
    NotBoundaryVertex(usize),
    #[error("boundary vertex {0} has more than one coordinate")]
    DuplicateCoordinate(usize),
    #[error("polygon has {got} vertices, triangulation boundary has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Triangulation and boundary polygon with matching, counterclockwise
/// orientation: `polygon.points()[k]` is the position of
/// `triangulation.boundary_cycle()[k]` and every face is counterclockwise
/// once the interior is embedded.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    triangulation: Arc<Triangulation>,
    polygon: BoundaryPolygon,
}

impl Problem {
    /// Attaches boundary coordinates given per vertex id. Reverses the
    /// triangulation's orientation when the polygon comes out clockwise.
    pub fn new(triangulation: Triangulation, boundary: &[(usize, Point)]) -> Result<Self, ProblemError> {
        let n = triangulation.vertex_count();
        let mut at: Vec<Option<Point>> = vec![None; n];
        for &(v, p) in boundary {
            if v >= n || !triangulation.is_boundary(v) {
                return Err(ProblemError::NotBoundaryVertex(v));
            }
            if at[v].replace(p).is_some() {
                return Err(ProblemError::DuplicateCoordinate(v));
            }
        }
        let ordered = |t: &Triangulation| -> Result<Vec<Point>, ProblemError> {
            t.boundary_cycle()
                .iter()
                .map(|&v| at[v].ok_or(ProblemError::MissingBoundaryCoordinate(v)))
                .collect()
        };
        let mut points = ordered(&triangulation)?;
        let triangulation = if signed_area(&points) < 0.0 {
            let r = triangulation.reversed();
            points = ordered(&r)?;
            r
        } else {
            triangulation
        };
        let polygon = BoundaryPolygon::new(points)?;
        Ok(Self {
            triangulation: Arc::new(triangulation),
            polygon,
        })
    }

    pub fn from_parts(triangulation: Arc<Triangulation>, polygon: BoundaryPolygon) -> Result<Self, ProblemError> {
        if polygon.len() != triangulation.n_boundary() {
            return Err(ProblemError::DimensionMismatch {
                expected: triangulation.n_boundary(),
                got: polygon.len(),
            });
        }
        Ok(Self {
            triangulation,
            polygon,
        })
    }

    pub fn triangulation(&self) -> &Arc<Triangulation> {
        &self.triangulation
    }

    pub fn polygon(&self) -> &BoundaryPolygon {
        &self.polygon
    }

    /// Boundary coordinates keyed by vertex id.
    pub fn boundary_coordinates(&self) -> Vec<(usize, Point)> {
        self.triangulation
            .boundary_cycle()
            .iter()
            .copied()
            .zip(self.polygon.points().iter().copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn faces() -> Vec<[usize; 3]> {
        vec![[0, 1, 4], [1, 2, 4], [2, 5, 4], [2, 3, 5], [3, 0, 5], [0, 4, 5]]
    }

    #[test]
    fn clockwise_coordinates_flip_orientation() {
        let t = Triangulation::new(6, &faces()).unwrap();
        // b1..b4 placed clockwise with respect to the canonical cycle
        let cw = [
            (0, Point::new(-1.0, -1.0)),
            (1, Point::new(-1.0, 1.0)),
            (2, Point::new(1.0, 1.0)),
            (3, Point::new(1.0, -1.0)),
        ];
        let p = Problem::new(t, &cw).unwrap();
        assert_eq!(p.triangulation().boundary_cycle(), &[0, 3, 2, 1]);
        assert!(p.polygon().area() > 0.0);
        // the boundary edge 0 -> 3 is now traversed by its face
        let f = p
            .triangulation()
            .faces()
            .iter()
            .find(|f| f.contains(&0) && f.contains(&3))
            .unwrap();
        let k = f.iter().position(|&v| v == 0).unwrap();
        assert_eq!(f[(k + 1) % 3], 3);
    }

    #[test]
    fn coordinate_errors() {
        let t = Triangulation::new(6, &faces()).unwrap();
        let e = Problem::new(t.clone(), &[(4, Point::origin())]).unwrap_err();
        assert_eq!(e, ProblemError::NotBoundaryVertex(4));
        let e = Problem::new(t.clone(), &[(0, Point::origin()), (0, Point::origin())]).unwrap_err();
        assert_eq!(e, ProblemError::DuplicateCoordinate(0));
        let e = Problem::new(t, &[(0, Point::origin())]).unwrap_err();
        assert_eq!(e, ProblemError::MissingBoundaryCoordinate(1));
    }
}
