//! Small hand-built instances used throughout the tests, benches and docs.

use crate::mesh::Triangulation;
use crate::polygon::Point;
use crate::problem::Problem;

fn problem(vertex_count: usize, faces: &[[usize; 3]], boundary: &[(f64, f64)]) -> Problem {
    let t = Triangulation::new(vertex_count, faces).expect("fixture mesh is a disk");
    let coords: Vec<(usize, Point)> = boundary
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| (k, Point::new(x, y)))
        .collect();
    Problem::new(t, &coords).expect("fixture polygon is valid")
}

/// Square `(±1, ±1)` with boundary `b1..b4 = 0..3` and interior vertices
/// `u1 = 4` (adjacent to `b1, b2, b3`) and `u2 = 5` (adjacent to `b3, b4, b1`).
pub fn square_two_interior() -> Problem {
    problem(
        6,
        &[[0, 1, 4], [1, 2, 4], [2, 5, 4], [2, 3, 5], [3, 0, 5], [0, 4, 5]],
        &[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)],
    )
}

/// The L-shaped hexagon `(0,0),(2,0),(2,1),(1,1),(1,2),(0,2)` with two
/// interior vertices; vertex 3 at `(1,1)` is reflex.
pub fn l_shape() -> Problem {
    problem(
        8,
        &[
            [0, 1, 6],
            [1, 2, 6],
            [2, 3, 6],
            [3, 7, 6],
            [3, 4, 7],
            [4, 5, 7],
            [5, 0, 7],
            [0, 6, 7],
        ],
        &[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
    )
}

/// Equilateral triangle `(0,0),(1,0),(1/2,√3/2)` with one interior vertex 3.
pub fn equilateral_one_interior() -> Problem {
    problem(
        4,
        &[[0, 1, 3], [1, 2, 3], [2, 0, 3]],
        &[(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)],
    )
}

/// Unit square split by the diagonal `(0, 2)`, a dividing edge.
pub fn diagonal_square() -> Problem {
    problem(
        4,
        &[[0, 1, 2], [0, 2, 3]],
        &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
    )
}

/// Non-convex quadrilateral `(0,0),(4,0),(1,1),(0,4)` (reflex vertex 2)
/// with three interior vertices.
pub fn reflex_quad() -> Problem {
    problem(
        7,
        &[
            [0, 1, 4],
            [1, 2, 4],
            [2, 5, 4],
            [2, 3, 5],
            [3, 6, 5],
            [3, 0, 6],
            [0, 4, 6],
            [4, 5, 6],
        ],
        &[(0.0, 0.0), (4.0, 0.0), (1.0, 1.0), (0.0, 4.0)],
    )
}
