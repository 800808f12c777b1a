//! Homotopies of embeddings of a quadrilateral with one reflex vertex.
//!
//! Moving the reflex vertex `v0` inside the triangle spanned by the three
//! convex vertices, the projective map fixing those three vertices and
//! sending `v0` to `v0'` carries a valid embedding over `v0` to a valid
//! embedding over `v0'`. In barycentric coordinates of the triangle such a
//! map is a positive diagonal scaling, so it preserves orientations and the
//! triangle interior.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use thiserror::Error;

use crate::embedding::{Embedding, Method};
use crate::error::EmbedError;
use crate::polygon::{orient, BoundaryPolygon, Point, PolygonError, REL_TOL};
use crate::problem::{Problem, ProblemError};
use crate::star::{star_embed, StarOptions};
use crate::validate::{validate, ValidityReport, ANGLE_TOL};

/// Homogeneous coordinates with `|w|` at or below this map to infinity.
pub const INFINITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("three of the correspondence points are collinear")]
    DegenerateCorrespondence,
    #[error("vertex {vertex} is sent to the line at infinity")]
    PointAtInfinity { vertex: usize },
    #[error("target ({x}, {y}) does not give a quadrilateral with a reflex vertex there")]
    TargetNotReflex { x: f64, y: f64 },
    #[error("expected a quadrilateral with exactly one reflex vertex: {0}")]
    NotAQuadInstance(String),
    #[error("base embedding is not valid")]
    InvalidBase,
    #[error("path sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<QuadError>,
    },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
}

/// A planar homography acting on `(x, y, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveTransform {
    h: Matrix3<f64>,
}

fn normalized(h: Matrix3<f64>) -> Matrix3<f64> {
    let big = h.amax();
    if h[(2, 2)].abs() > 1e-12 * big {
        h / h[(2, 2)]
    } else {
        h / big
    }
}

impl ProjectiveTransform {
    pub fn identity() -> Self {
        Self { h: Matrix3::identity() }
    }

    /// # Panics
    /// If `h` is singular.
    pub fn from_matrix(h: Matrix3<f64>) -> Self {
        assert!(h.determinant() != 0.0, "singular homography");
        Self { h: normalized(h) }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.h
    }

    pub fn determinant(&self) -> f64 {
        self.h.determinant()
    }

    pub fn homogeneous(&self, p: &Point) -> Vector3<f64> {
        self.h * Vector3::new(p.x, p.y, 1.0)
    }

    /// `None` for points sent to the line at infinity.
    pub fn apply(&self, p: &Point) -> Option<Point> {
        let q = self.homogeneous(p);
        (q.z.abs() > INFINITY_TOL).then(|| Point::new(q.x / q.z, q.y / q.z))
    }

    pub fn inverse(&self) -> Self {
        let inv = self.h.try_inverse().expect("homography is invertible");
        Self { h: normalized(inv) }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ProjectiveTransform) -> Self {
        Self {
            h: normalized(other.h * self.h),
        }
    }

    /// Largest coefficient difference after scaling both to unit max-norm
    /// with matching sign.
    pub fn scale_distance(&self, other: &ProjectiveTransform) -> f64 {
        let a = self.h / self.h.amax();
        let b = other.h / other.h.amax();
        (a - b).amax().min((a + b).amax())
    }
}

/// The homography sending `src[k]` to `dst[k]`.
pub fn projective_from_quads(src: &[Point; 4], dst: &[Point; 4]) -> Result<ProjectiveTransform, QuadError> {
    for pts in [src, dst] {
        let d = crate::polygon::diameter(pts);
        let tol = REL_TOL * d * d;
        for (a, b, c) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
            if orient(&pts[a], &pts[b], &pts[c]).abs() <= tol {
                return Err(QuadError::DegenerateCorrespondence);
            }
        }
    }
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut rhs = SVector::<f64, 8>::zeros();
    for k in 0..4 {
        let (x, y) = (src[k].x, src[k].y);
        let (u, v) = (dst[k].x, dst[k].y);
        let r = 2 * k;
        a.row_mut(r)
            .copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
        rhs[r] = u;
        rhs[r + 1] = v;
    }
    let h = a.lu().solve(&rhs).ok_or(QuadError::DegenerateCorrespondence)?;
    let m = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0);
    if m.determinant() == 0.0 {
        return Err(QuadError::DegenerateCorrespondence);
    }
    Ok(ProjectiveTransform { h: normalized(m) })
}

/// Maps every vertex through `phi`; the combinatorics are unchanged.
pub fn transport_embedding(phi: &ProjectiveTransform, e: &Embedding) -> Result<Embedding, QuadError> {
    let coords = e
        .coords()
        .iter()
        .enumerate()
        .map(|(vertex, p)| phi.apply(p).ok_or(QuadError::PointAtInfinity { vertex }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut info = e.info.clone();
    info.method = Method::Transported;
    Ok(Embedding::new(e.triangulation().clone(), coords, info))
}

/// A quadrilateral problem with a single reflex vertex.
#[derive(Debug, Clone)]
pub struct QuadInstance {
    problem: Problem,
    reflex: usize,
}

impl QuadInstance {
    pub fn new(problem: Problem) -> Result<Self, QuadError> {
        let n = problem.polygon().len();
        if n != 4 {
            return Err(QuadError::NotAQuadInstance(format!("{n} boundary vertices")));
        }
        let reflex = problem.polygon().reflex_vertices();
        if reflex.len() != 1 {
            return Err(QuadError::NotAQuadInstance(format!("{} reflex vertices", reflex.len())));
        }
        Ok(Self {
            problem,
            reflex: reflex[0],
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Position of the reflex vertex in the boundary cycle.
    pub fn reflex_index(&self) -> usize {
        self.reflex
    }

    /// Vertex id of the reflex vertex.
    pub fn reflex_vertex(&self) -> usize {
        self.problem.triangulation().boundary_cycle()[self.reflex]
    }

    pub fn v0(&self) -> Point {
        self.problem.polygon().points()[self.reflex]
    }

    /// The convex vertices following the reflex one in cycle order.
    pub fn hull(&self) -> [Point; 3] {
        let p = self.problem.polygon().points();
        [1, 2, 3].map(|s| p[(self.reflex + s) % 4])
    }

    pub fn hull_centroid(&self) -> Point {
        let [a, b, c] = self.hull();
        Point::from((a.coords + b.coords + c.coords) / 3.0)
    }

    pub fn diameter(&self) -> f64 {
        self.problem.polygon().diameter()
    }

    /// Boundary points with the reflex vertex moved to `target`.
    pub fn quad_points(&self, target: Point) -> [Point; 4] {
        let mut q: [Point; 4] = std::array::from_fn(|k| self.problem.polygon().points()[k]);
        q[self.reflex] = target;
        q
    }

    /// Whether `target` lies strictly inside the hull triangle with an
    /// interior angle above π.
    pub fn admissible(&self, target: &Point) -> bool {
        let [next, opposite, prev] = self.hull();
        let tol = self.problem.polygon().area_tolerance();
        if !(orient(&next, &opposite, target) > tol
            && orient(&opposite, &prev, target) > tol
            && orient(&prev, &next, target) > tol)
        {
            return false;
        }
        let (din, dout) = (target - prev, next - target);
        let turn = crate::polygon::cross(&din, &dout).atan2(din.dot(&dout));
        -turn > ANGLE_TOL
    }

    /// A valid embedding over `v0`, from the star construction.
    pub fn base_embedding(&self) -> Result<Embedding, QuadError> {
        Ok(star_embed(&self.problem, &StarOptions::default())?.embedding)
    }
}

/// One point of the section: the embedding over `target` and its certificates.
#[derive(Debug, Clone)]
pub struct SectionSample {
    pub target: Point,
    pub transform: ProjectiveTransform,
    pub embedding: Embedding,
    pub report: ValidityReport,
    /// Largest `|φ(src_k) - dst_k|`.
    pub correspondence_residual: f64,
    /// `|φ(v0) - target|` before boundary coordinates are snapped.
    pub fiber_error: f64,
}

impl SectionSample {
    pub fn is_valid(&self) -> bool {
        self.report.valid
    }
}

/// Transports `base_embedding` into the fiber over `target`.
///
/// Transported boundary coordinates are replaced by the exact quadrilateral
/// vertices after the residuals have been recorded.
pub fn section(base: &QuadInstance, base_embedding: &Embedding, target: Point) -> Result<SectionSample, QuadError> {
    if !base.admissible(&target) {
        return Err(QuadError::TargetNotReflex {
            x: target.x,
            y: target.y,
        });
    }
    let src = base.quad_points(base.v0());
    let dst = base.quad_points(target);
    let transform = projective_from_quads(&src, &dst)?;
    let mut embedding = transport_embedding(&transform, base_embedding)?;

    let mut correspondence_residual: f64 = 0.0;
    for (s, d) in src.iter().zip(&dst) {
        let img = transform.apply(s).ok_or(QuadError::PointAtInfinity {
            vertex: base.reflex_vertex(),
        })?;
        correspondence_residual = correspondence_residual.max((img - d).norm());
    }
    let fiber_error = (embedding.position(base.reflex_vertex()) - target).norm();

    let t = base.problem.triangulation().clone();
    let polygon = BoundaryPolygon::new(dst.to_vec())?;
    let mut coords = embedding.coords().to_vec();
    for (&v, p) in t.boundary_cycle().iter().zip(&dst) {
        coords[v] = *p;
    }
    embedding = Embedding::new(t, coords, embedding.info.clone());
    let report = validate(&embedding, &polygon);
    Ok(SectionSample {
        target,
        transform,
        embedding,
        report,
        correspondence_residual,
        fiber_error,
    })
}

#[derive(Debug, Clone)]
pub struct HomotopyPath {
    pub samples: Vec<SectionSample>,
    /// Largest vertex displacement between consecutive samples.
    pub max_step_displacement: f64,
}

impl HomotopyPath {
    pub fn all_valid(&self) -> bool {
        self.samples.iter().all(SectionSample::is_valid)
    }

    pub fn first_invalid(&self) -> Option<usize> {
        self.samples.iter().position(|s| !s.is_valid())
    }
}

/// Section samples along `path`; fails at the first inadmissible point.
pub fn homotopy_path(base: &QuadInstance, base_embedding: &Embedding, path: &[Point]) -> Result<HomotopyPath, QuadError> {
    let mut samples: Vec<SectionSample> = Vec::with_capacity(path.len());
    let mut max_step_displacement: f64 = 0.0;
    for (index, &target) in path.iter().enumerate() {
        let s = section(base, base_embedding, target).map_err(|e| QuadError::Sample {
            index,
            source: Box::new(e),
        })?;
        if let Some(prev) = samples.last() {
            max_step_displacement = max_step_displacement.max(prev.embedding.max_displacement(&s.embedding));
        }
        samples.push(s);
    }
    Ok(HomotopyPath {
        samples,
        max_step_displacement,
    })
}

/// `n` evenly spaced points from `a` to `b`, both included.
pub fn line_path(a: Point, b: Point, n: usize) -> Vec<Point> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * (k as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// `n` points on the circle of radius `r` around `c`.
pub fn circle_path(c: Point, r: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            c + nalgebra::Vector2::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn reflex_quad() -> [Point; 4] {
        [p(0.0, 0.0), p(4.0, 0.0), p(1.0, 1.0), p(0.0, 4.0)]
    }

    #[test]
    fn identity_when_src_equals_dst() {
        let q = reflex_quad();
        let h = projective_from_quads(&q, &q).unwrap();
        assert!((h.matrix() - Matrix3::identity()).amax() < 1e-14);
    }

    #[test]
    fn translation() {
        let src = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        let dst = src.map(|q| q + nalgebra::Vector2::new(1.0, 0.0));
        let h = projective_from_quads(&src, &dst).unwrap();
        let want = Matrix3::new(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!((h.matrix() - want).amax() < 1e-14);
    }

    #[test]
    fn moved_reflex_vertex_residual() {
        let src = reflex_quad();
        let mut dst = src;
        dst[2] = p(1.2, 0.9);
        let h = projective_from_quads(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert!((h.apply(s).unwrap() - d).norm() < 1e-10 * 4.0 * 2f64.sqrt());
        }
    }

    #[test]
    fn collinear_points_rejected() {
        let src = [p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0), p(0.0, 1.0)];
        let dst = reflex_quad();
        assert_eq!(projective_from_quads(&src, &dst), Err(QuadError::DegenerateCorrespondence));
        assert_eq!(projective_from_quads(&dst, &src), Err(QuadError::DegenerateCorrespondence));
    }

    #[test]
    fn composition_and_inverse() {
        let a = reflex_quad();
        let mut b = a;
        b[2] = p(1.2, 0.9);
        let mut c = a;
        c[2] = p(0.7, 1.4);
        let ab = projective_from_quads(&a, &b).unwrap();
        let bc = projective_from_quads(&b, &c).unwrap();
        let ac = projective_from_quads(&a, &c).unwrap();
        assert!(ab.then(&bc).scale_distance(&ac) < 1e-9);
        let back = ab.then(&ab.inverse());
        assert!(back.scale_distance(&ProjectiveTransform::identity()) < 1e-12);
    }

    #[test]
    fn point_at_infinity() {
        // w = 1 + x vanishes on x = -1
        let h = ProjectiveTransform::from_matrix(Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0));
        assert_eq!(h.apply(&p(-1.0, 3.0)), None);
        let q = fixtures::square_two_interior();
        let mut coords = q.polygon().points().to_vec();
        coords.extend([p(0.3, -0.3), p(-0.3, 0.3)]);
        let e = Embedding::new(q.triangulation().clone(), coords, crate::embedding::SolverInfo::given());
        // b1 = (-1, -1) and b4 = (-1, 1) lie on the singular line
        assert_eq!(transport_embedding(&h, &e).unwrap_err(), QuadError::PointAtInfinity { vertex: 0 });
    }

    #[test]
    fn transport_round_trip() {
        let q = QuadInstance::new(fixtures::reflex_quad()).unwrap();
        let base = q.base_embedding().unwrap();
        let src = q.quad_points(q.v0());
        let dst = q.quad_points(p(1.2, 0.9));
        let h = projective_from_quads(&src, &dst).unwrap();
        let there = transport_embedding(&h, &base).unwrap();
        let back = transport_embedding(&h.inverse(), &there).unwrap();
        assert!(back.max_displacement(&base) < 1e-9 * q.diameter());
        assert_eq!(there.info.method, Method::Transported);
    }

    #[test]
    fn affine_map_keeps_validity() {
        let pr = fixtures::square_two_interior();
        let e = crate::star::star_embed(&pr, &StarOptions::default()).unwrap().embedding;
        let h = ProjectiveTransform::from_matrix(Matrix3::new(2.0, 0.5, 1.0, -0.3, 1.5, 2.0, 0.0, 0.0, 1.0));
        let moved = transport_embedding(&h, &e).unwrap();
        let poly = BoundaryPolygon::new(moved.boundary_positions()).unwrap();
        assert!(validate(&moved, &poly).valid);
    }

    #[test]
    fn section_identity_and_fiber() {
        let q = QuadInstance::new(fixtures::reflex_quad()).unwrap();
        assert_eq!(q.reflex_vertex(), 2);
        let base = q.base_embedding().unwrap();
        let s = section(&q, &base, q.v0()).unwrap();
        assert!(s.embedding.max_displacement(&base) < 1e-12);
        assert!(s.is_valid());

        let s = section(&q, &base, p(1.2, 0.9)).unwrap();
        assert!(s.is_valid(), "{:?}", s.report);
        assert!(s.fiber_error <= 1e-10 * q.diameter());
        assert!(s.correspondence_residual <= 1e-10 * q.diameter());
        assert_eq!(s.embedding.position(2), p(1.2, 0.9));
    }

    #[test]
    fn section_rejects_bad_targets() {
        let q = QuadInstance::new(fixtures::reflex_quad()).unwrap();
        let base = q.base_embedding().unwrap();
        // outside the hull triangle, and on the diagonal (angle exactly π)
        for t in [p(5.0, 5.0), p(2.0, 2.0), p(-0.5, 1.0)] {
            assert!(matches!(section(&q, &base, t), Err(QuadError::TargetNotReflex { .. })));
        }
    }

    #[test]
    fn circle_of_sections_is_continuous() {
        let q = QuadInstance::new(fixtures::reflex_quad()).unwrap();
        let base = q.base_embedding().unwrap();
        let r = 0.1;
        let path = circle_path(q.v0(), r, 20);
        let h = homotopy_path(&q, &base, &path).unwrap();
        assert!(h.all_valid());
        let step = 2.0 * std::f64::consts::PI * r / 20.0;
        assert!(h.max_step_displacement < 10.0 * step, "{}", h.max_step_displacement);
    }

    #[test]
    fn constant_and_exiting_paths() {
        let q = QuadInstance::new(fixtures::reflex_quad()).unwrap();
        let base = q.base_embedding().unwrap();
        let h = homotopy_path(&q, &base, &[p(1.1, 1.0); 5]).unwrap();
        assert_eq!(h.max_step_displacement, 0.0);
        let path = line_path(q.v0(), p(3.0, 3.0), 10);
        match homotopy_path(&q, &base, &path) {
            Err(QuadError::Sample { index, .. }) => {
                assert!(index > 0 && index < 10);
                assert!(q.admissible(&path[index - 1]));
                assert!(!q.admissible(&path[index]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn not_a_quad() {
        assert!(matches!(
            QuadInstance::new(fixtures::square_two_interior()),
            Err(QuadError::NotAQuadInstance(_))
        ));
        assert!(matches!(
            QuadInstance::new(fixtures::l_shape()),
            Err(QuadError::NotAQuadInstance(_))
        ));
    }
}
