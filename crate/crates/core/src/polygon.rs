//! Boundary polygon geometry: simplicity, convexity, kernels and eyes.
//!
//! All predicates use a tolerance relative to the polygon diameter
//! (`1e-12 * diameter` for lengths, `1e-12 * diameter^2` for areas).

use nalgebra::{Point2, Vector2};
use thiserror::Error;

pub type Point = Point2<f64>;
pub type Vector = Vector2<f64>;

/// Relative tolerance used by every geometric predicate.
pub const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolygonError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("vertex {0} is collinear with its neighbours")]
    Collinear(usize),
    #[error("edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("polygon is clockwise or has zero area")]
    NotCounterclockwise,
    #[error("polygon is not strictly star-shaped")]
    NotStarShaped,
    #[error("point ({0}, {1}) is not in the interior of the convex hull")]
    EyeOutsideHull(f64, f64),
    #[error("point ({0}, {1}) is not in the open kernel")]
    EyeNotInKernel(f64, f64),
}

#[inline]
pub fn cross(a: &Vector, b: &Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Twice the signed area of triangle `abc`; positive when counterclockwise.
#[inline]
pub fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    cross(&(b - a), &(c - a))
}

/// Signed area of a closed polygon (shoelace).
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (p, q) = (&points[i], &points[(i + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        / 2.0
}

/// Largest pairwise distance.
pub fn diameter(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

/// Whether closed segments `ab` and `cd` intersect, treating orientation
/// values within `tol` of zero as collinear.
pub fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point, tol: f64) -> bool {
    let sgn = |x: f64| {
        if x > tol {
            1
        } else if x < -tol {
            -1
        } else {
            0
        }
    };
    let o1 = sgn(orient(a, b, c));
    let o2 = sgn(orient(a, b, d));
    let o3 = sgn(orient(c, d, a));
    let o4 = sgn(orient(c, d, b));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    let within = |p: &Point, q: &Point, r: &Point| {
        r.x >= p.x.min(q.x) - tol.sqrt()
            && r.x <= p.x.max(q.x) + tol.sqrt()
            && r.y >= p.y.min(q.y) - tol.sqrt()
            && r.y <= p.y.max(q.y) + tol.sqrt()
    };
    (o1 == 0 && within(a, b, c))
        || (o2 == 0 && within(a, b, d))
        || (o3 == 0 && within(c, d, a))
        || (o4 == 0 && within(c, d, b))
}

/// Centroid of a simple polygon; falls back to the vertex mean when the area
/// vanishes.
pub fn polygon_centroid(points: &[Point]) -> Point {
    let n = points.len();
    let area = signed_area(points);
    if n < 3 || area.abs() <= f64::MIN_POSITIVE {
        let sum = points.iter().fold(Vector::zeros(), |acc, p| acc + p.coords);
        return Point::from(sum / n.max(1) as f64);
    }
    // shift to the first vertex for accuracy
    let o = points[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = points[i] - o;
        let q = points[(i + 1) % n] - o;
        let w = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point::new(o.x + cx / (6.0 * area), o.y + cy / (6.0 * area))
}

/// Convex hull (Andrew's monotone chain), counterclockwise, strict: points on
/// hull edges are dropped. Returns indices into `points`.
pub fn convex_hull_indices(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i]
            .x
            .total_cmp(&points[j].x)
            .then(points[i].y.total_cmp(&points[j].y))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if orient(&points[a], &points[b], &points[i]) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// Barycentric coordinates of `p` in triangle `abc`.
pub fn barycentric(p: &Point, a: &Point, b: &Point, c: &Point) -> [f64; 3] {
    let det = orient(a, b, c);
    let la = orient(p, b, c) / det;
    let lb = orient(a, p, c) / det;
    [la, lb, 1.0 - la - lb]
}

/// A simple, counterclockwise polygon without collinear consecutive
/// vertices. Vertex `k` corresponds to the `k`-th entry of the
/// triangulation's boundary cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPolygon {
    points: Vec<Point>,
    diameter: f64,
}

/// The convex set of eyes of a polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPolygon {
    pub vertices: Vec<Point>,
    pub area: f64,
}

impl KernelPolygon {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn centroid(&self) -> Option<Point> {
        (!self.vertices.is_empty()).then(|| polygon_centroid(&self.vertices))
    }
}

/// Strictly positive convex-combination weights of the boundary vertices
/// reproducing an eye.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeCoefficients {
    pub eye: Point,
    pub lambda: Vec<f64>,
}

impl BoundaryPolygon {
    pub fn new(points: Vec<Point>) -> Result<Self, PolygonError> {
        let n = points.len();
        if n < 3 {
            return Err(PolygonError::TooFewVertices(n));
        }
        if let Some(i) = points.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(PolygonError::NonFinite(i));
        }
        let diameter = diameter(&points);
        let len_tol = REL_TOL * diameter;
        for i in 0..n {
            let a = &points[(i + n - 1) % n];
            let b = &points[i];
            let c = &points[(i + 1) % n];
            let base = (c - a).norm();
            if (b - a).norm() <= len_tol || base <= len_tol || orient(a, b, c).abs() / base <= len_tol {
                return Err(PolygonError::Collinear(i));
            }
        }
        let area_tol = REL_TOL * diameter * diameter;
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (&points[i], &points[(i + 1) % n]);
                let (c, d) = (&points[j], &points[(j + 1) % n]);
                if segments_intersect(a, b, c, d, area_tol) {
                    return Err(PolygonError::SelfIntersecting(i, j));
                }
            }
        }
        if signed_area(&points) <= area_tol {
            return Err(PolygonError::NotCounterclockwise);
        }
        Ok(Self { points, diameter })
    }

    /// Skips validation; unit tests use it for degenerate systems.
    #[cfg(test)]
    pub(crate) fn new_unchecked(points: Vec<Point>) -> Self {
        let diameter = diameter(&points);
        Self { points, diameter }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn length_tolerance(&self) -> f64 {
        REL_TOL * self.diameter
    }

    pub fn area_tolerance(&self) -> f64 {
        REL_TOL * self.diameter * self.diameter
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.points)
    }

    fn turn(&self, i: usize) -> f64 {
        let n = self.points.len();
        let a = &self.points[(i + n - 1) % n];
        let b = &self.points[i];
        let c = &self.points[(i + 1) % n];
        cross(&(b - a), &(c - b))
    }

    /// Indices whose interior angle exceeds π.
    pub fn reflex_vertices(&self) -> Vec<usize> {
        let tol = self.area_tolerance();
        (0..self.points.len()).filter(|&i| self.turn(i) < -tol).collect()
    }

    pub fn is_convex(&self) -> bool {
        let tol = self.area_tolerance();
        (0..self.points.len()).all(|i| self.turn(i) >= -tol)
    }

    /// Intersection of the closed inner half-planes of all edges, computed by
    /// clipping a bounding box edge by edge.
    pub fn kernel(&self) -> KernelPolygon {
        let (mut lo, mut hi) = (self.points[0], self.points[0]);
        for p in &self.points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let pad = self.diameter;
        let mut region = vec![
            Point::new(lo.x - pad, lo.y - pad),
            Point::new(hi.x + pad, lo.y - pad),
            Point::new(hi.x + pad, hi.y + pad),
            Point::new(lo.x - pad, hi.y + pad),
        ];
        let n = self.points.len();
        let dedup_tol = self.length_tolerance();
        for i in 0..n {
            let a = self.points[i];
            let dir = self.points[(i + 1) % n] - a;
            region = clip_left(&region, &a, &dir);
            region.dedup_by(|p, q| (*p - *q).norm() <= dedup_tol);
            if region.len() > 1 && (region[0] - region[region.len() - 1]).norm() <= dedup_tol {
                region.pop();
            }
            if region.is_empty() {
                break;
            }
        }
        let area = if region.len() >= 3 {
            signed_area(&region).max(0.0)
        } else {
            0.0
        };
        KernelPolygon { vertices: region, area }
    }

    pub fn is_strictly_star_shaped(&self) -> bool {
        self.kernel().area > self.area_tolerance()
    }

    /// Whether `p` lies strictly on the inner side of every edge line.
    pub fn in_open_kernel(&self, p: &Point) -> bool {
        let n = self.points.len();
        let tol = self.length_tolerance();
        (0..n).all(|i| {
            let a = &self.points[i];
            let d = self.points[(i + 1) % n] - a;
            cross(&d, &(p - a)) / d.norm() > tol
        })
    }

    /// The centroid of the kernel.
    pub fn select_eye(&self) -> Result<Point, PolygonError> {
        let k = self.kernel();
        if k.area <= self.area_tolerance() {
            return Err(PolygonError::NotStarShaped);
        }
        Ok(polygon_centroid(&k.vertices))
    }

    /// Validates a user-supplied eye against the open kernel.
    pub fn check_eye(&self, eye: &Point) -> Result<(), PolygonError> {
        if !self.in_open_kernel(eye) {
            return Err(PolygonError::EyeNotInKernel(eye.x, eye.y));
        }
        Ok(())
    }

    /// Strictly positive weights `λ` with `Σλ = 1` and `Σλ_j v_j = eye`.
    ///
    /// Mixes the uniform weights with barycentric weights of an auxiliary
    /// point `p = (eye - (1-t) c) / t` (`c` the vertex mean) taken in a fan
    /// triangle of the convex hull; `t` moves toward 1 until `p` lands in
    /// the hull.
    pub fn eye_coefficients(&self, eye: &Point) -> Result<EyeCoefficients, PolygonError> {
        let pts = &self.points;
        let n = pts.len();
        let hull = convex_hull_indices(pts);
        let tol = self.length_tolerance();
        let m = hull.len();
        let strictly_inside = (0..m).all(|k| {
            let a = &pts[hull[k]];
            let d = pts[hull[(k + 1) % m]] - a;
            cross(&d, &(eye - a)) / d.norm() > tol
        });
        if !strictly_inside {
            return Err(PolygonError::EyeOutsideHull(eye.x, eye.y));
        }
        let centre = Point::from(pts.iter().fold(Vector::zeros(), |acc, p| acc + p.coords) / n as f64);

        let mut t: f64 = 0.9;
        for _ in 0..60 {
            let p = Point::from((eye.coords - (1.0 - t) * centre.coords) / t);
            if let Some((tri, beta)) = locate_in_fan(pts, &hull, &p) {
                let mut lambda = vec![(1.0 - t) / n as f64; n];
                for k in 0..3 {
                    lambda[tri[k]] += t * beta[k];
                }
                return Ok(EyeCoefficients { eye: *eye, lambda });
            }
            t = 0.5 * (1.0 + t);
        }
        Err(PolygonError::EyeOutsideHull(eye.x, eye.y))
    }

    /// Even-odd point-in-polygon test (boundary points count as outside up
    /// to rounding).
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.points.len();
        let mut inside = false;
        for i in 0..n {
            let a = &self.points[i];
            let b = &self.points[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Keeps the part of convex `poly` on the left of the line through `a` with
/// direction `dir`.
fn clip_left(poly: &[Point], a: &Point, dir: &Vector) -> Vec<Point> {
    let side = |p: &Point| cross(dir, &(p - a));
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(*p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Finds a fan triangle `(h0, h_k, h_{k+1})` of the hull containing `p` and
/// returns polygon indices with the (clamped, renormalised) barycentric
/// coordinates.
fn locate_in_fan(pts: &[Point], hull: &[usize], p: &Point) -> Option<([usize; 3], [f64; 3])> {
    const SLACK: f64 = 1e-14;
    for k in 1..hull.len() - 1 {
        let tri = [hull[0], hull[k], hull[k + 1]];
        let b = barycentric(p, &pts[tri[0]], &pts[tri[1]], &pts[tri[2]]);
        if b.iter().all(|&x| x >= -SLACK) {
            let clamped = b.map(|x| x.max(0.0));
            let s: f64 = clamped.iter().sum();
            return Some((tri, clamped.map(|x| x / s)));
        }
    }
    None
}
