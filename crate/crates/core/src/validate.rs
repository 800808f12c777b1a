//! Certificates for candidate embeddings.
//!
//! An embedding is accepted only if its boundary matches the polygon, every
//! face has positive area beyond tolerance, no two edges without a shared
//! endpoint meet, and every reflex boundary vertex lies strictly inside the
//! convex hull of its neighbours. Touching configurations are rejected.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::mesh::Edge;
use crate::polygon::{orient, segments_intersect, BoundaryPolygon, REL_TOL};

/// Angular slack for the reflex-hull test, in radians.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceStatus {
    Positive,
    Degenerate,
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceVerdict {
    pub area: f64,
    pub status: FaceStatus,
}

/// Result of the hull test at one reflex boundary vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflexVerdict {
    pub vertex: usize,
    /// Widest angular gap between consecutive incident edge directions; the
    /// vertex is inside the hull of its neighbours iff this is below π.
    pub max_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub face_areas: Vec<f64>,
    pub inverted_faces: Vec<usize>,
    pub degenerate_faces: Vec<usize>,
    pub crossings: Vec<(Edge, Edge)>,
    pub reflex_checks: Vec<ReflexVerdict>,
    pub boundary_mismatch: Vec<usize>,
    pub valid: bool,
}

/// Signed face areas under the stored (counterclockwise) orientation.
pub fn check_orientations(e: &Embedding, tol: f64) -> Vec<FaceVerdict> {
    e.triangulation()
        .faces()
        .iter()
        .map(|f| {
            let area = 0.5 * orient(&e.position(f[0]), &e.position(f[1]), &e.position(f[2]));
            let status = if area > tol {
                FaceStatus::Positive
            } else if area < -tol {
                FaceStatus::Inverted
            } else {
                FaceStatus::Degenerate
            };
            FaceVerdict { area, status }
        })
        .collect()
}

/// All pairs of edges without a common endpoint that touch or cross.
/// `tol` is the orientation (twice-area) tolerance.
pub fn check_crossings(e: &Embedding, tol: f64) -> Vec<(Edge, Edge)> {
    let edges = e.triangulation().edges();
    let mut out = Vec::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[k + 1..] {
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let (pa, pb, pc, pd) = (e.position(a), e.position(b), e.position(c), e.position(d));
            if segments_intersect(&pa, &pb, &pc, &pd, tol) {
                out.push(((a, b), (c, d)));
            }
        }
    }
    out
}

/// Widest gap between consecutive directions from `v` to its neighbours.
/// Returns `2π` when a neighbour coincides with `v`.
fn max_angular_gap(e: &Embedding, v: usize) -> f64 {
    let p = e.position(v);
    let mut angles = Vec::new();
    for &w in e.triangulation().vertex_neighbors(v) {
        let d = e.position(w) - p;
        if d.norm() == 0.0 {
            return 2.0 * PI;
        }
        angles.push(d.y.atan2(d.x));
    }
    if angles.len() < 2 {
        return 2.0 * PI;
    }
    angles.sort_by(f64::total_cmp);
    let wrap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

/// Hull test at every reflex vertex of `polygon`.
pub fn check_reflex_hull(e: &Embedding, polygon: &BoundaryPolygon) -> Vec<ReflexVerdict> {
    let cycle = e.triangulation().boundary_cycle();
    polygon
        .reflex_vertices()
        .into_iter()
        .map(|k| {
            let vertex = cycle[k];
            let max_gap = max_angular_gap(e, vertex);
            ReflexVerdict {
                vertex,
                max_gap,
                pass: max_gap < PI - ANGLE_TOL,
            }
        })
        .collect()
}

/// Runs every check with tolerances scaled by the polygon diameter.
pub fn validate(e: &Embedding, polygon: &BoundaryPolygon) -> ValidityReport {
    let area_tol = polygon.area_tolerance();
    let cycle = e.triangulation().boundary_cycle();
    let boundary_mismatch: Vec<usize> = if cycle.len() != polygon.len() {
        cycle.to_vec()
    } else {
        cycle
            .iter()
            .zip(polygon.points())
            .filter(|(&v, p)| e.position(v) != **p)
            .map(|(&v, _)| v)
            .collect()
    };
    let faces = check_orientations(e, area_tol);
    let mut inverted_faces = Vec::new();
    let mut degenerate_faces = Vec::new();
    for (k, f) in faces.iter().enumerate() {
        match f.status {
            FaceStatus::Inverted => inverted_faces.push(k),
            FaceStatus::Degenerate => degenerate_faces.push(k),
            FaceStatus::Positive => {}
        }
    }
    // orientation values are twice the area
    let crossings = check_crossings(e, 2.0 * area_tol);
    let reflex_checks = check_reflex_hull(e, polygon);
    let valid = boundary_mismatch.is_empty()
        && inverted_faces.is_empty()
        && degenerate_faces.is_empty()
        && crossings.is_empty()
        && reflex_checks.iter().all(|r| r.pass);
    ValidityReport {
        face_areas: faces.iter().map(|f| f.area).collect(),
        inverted_faces,
        degenerate_faces,
        crossings,
        reflex_checks,
        boundary_mismatch,
        valid,
    }
}

/// Area tolerance for an embedding without a reference polygon.
pub fn default_area_tolerance(e: &Embedding) -> f64 {
    let d = crate::polygon::diameter(&e.boundary_positions());
    REL_TOL * d * d
}
