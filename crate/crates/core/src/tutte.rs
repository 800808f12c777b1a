//! Tutte embeddings for convex boundaries.
//!
//! Each interior vertex is placed at a convex combination of its neighbours
//! with row-stochastic weights `w_ij = c_ij / Σ_j c_ij`; the boundary is
//! pinned to the polygon. The resulting system is diagonally dominant (and in
//! general unsymmetric) and is solved with the skyline LU of
//! [`crate::sparse`].

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{Embedding, Method, SolverInfo};
use crate::error::EmbedError;
use crate::mesh::Triangulation;
use crate::polygon::{BoundaryPolygon, Point};
use crate::problem::Problem;
use crate::sparse::{CsrMatrix, SkylineLu, SolveError};
use crate::validate::{validate, ValidityReport};

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Range of the seeded random weights.
pub const RANDOM_WEIGHT_RANGE: (f64, f64) = (0.1, 10.0);

/// Unnormalized positive weights `c_ij` for every directed edge leaving an
/// interior vertex. `rows[k][m]` belongs to the `m`-th fan neighbour of the
/// `k`-th interior vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct RawWeights {
    rows: Vec<Vec<f64>>,
}

impl RawWeights {
    pub fn uniform(t: &Triangulation) -> Self {
        Self {
            rows: t
                .interior_vertices()
                .iter()
                .map(|&v| vec![1.0; t.degree(v)])
                .collect(),
        }
    }

    /// Independent uniform draws in [`RANDOM_WEIGHT_RANGE`], in interior
    /// vertex order then fan order.
    pub fn random(t: &Triangulation, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = RANDOM_WEIGHT_RANGE;
        Self {
            rows: t
                .interior_vertices()
                .iter()
                .map(|&v| (0..t.degree(v)).map(|_| rng.random_range(lo..hi)).collect())
                .collect(),
        }
    }

    /// Weights per directed edge `(from, to, c)`; every edge leaving an
    /// interior vertex must be listed exactly once. Entries leaving boundary
    /// vertices are ignored.
    pub fn from_directed(t: &Triangulation, entries: &[(usize, usize, f64)]) -> Result<Self, EmbedError> {
        let mut map: HashMap<(usize, usize), f64> = HashMap::new();
        for &(i, j, c) in entries {
            if i >= t.vertex_count() || j >= t.vertex_count() || !t.vertex_neighbors(i).contains(&j) {
                return Err(EmbedError::NotAnEdge { from: i, to: j });
            }
            if t.is_boundary(i) {
                continue;
            }
            if map.insert((i, j), c).is_some() {
                return Err(EmbedError::DuplicateWeight { from: i, to: j });
            }
        }
        let rows = t
            .interior_vertices()
            .iter()
            .map(|&i| {
                t.vertex_neighbors(i)
                    .iter()
                    .map(|&j| map.get(&(i, j)).copied().ok_or(EmbedError::MissingWeight { from: i, to: j }))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { rows })
    }

    /// Rows aligned with the interior vertices and their fans.
    pub fn from_rows(t: &Triangulation, rows: Vec<Vec<f64>>) -> Result<Self, EmbedError> {
        if rows.len() != t.n_interior() {
            return Err(EmbedError::DimensionMismatch {
                what: "weight rows",
                expected: t.n_interior(),
                got: rows.len(),
            });
        }
        for (row, &v) in rows.iter().zip(t.interior_vertices()) {
            if row.len() != t.degree(v) {
                return Err(EmbedError::DimensionMismatch {
                    what: "weights at a vertex",
                    expected: t.degree(v),
                    got: row.len(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Row-stochastic weights: `rows[k]` lists `(neighbour, w)` for the `k`-th
/// interior vertex. Symmetry `w_ij = w_ji` is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightScheme {
    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }
}

/// Normalizes raw weights per interior vertex.
pub fn normalize_weights(t: &Triangulation, raw: &RawWeights) -> Result<WeightScheme, EmbedError> {
    let raw = RawWeights::from_rows(t, raw.rows.clone())?;
    let mut rows = Vec::with_capacity(raw.rows.len());
    for (row, &i) in raw.rows.iter().zip(t.interior_vertices()) {
        let fan = t.vertex_neighbors(i);
        for (&c, &j) in row.iter().zip(fan) {
            if c.is_nan() || c <= 0.0 || !c.is_finite() {
                return Err(EmbedError::NonPositiveWeight { from: i, to: j, value: c });
            }
        }
        let total: f64 = row.iter().sum();
        rows.push(fan.iter().zip(row).map(|(&j, &c)| (j, c / total)).collect());
    }
    Ok(WeightScheme { rows })
}

/// Number of interior and boundary unknowns; rows `0..n_interior` are the
/// interior block, the remaining rows are identity rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub n_interior: usize,
    pub n_boundary: usize,
}

impl BlockLayout {
    pub fn dim(&self) -> usize {
        self.n_interior + self.n_boundary
    }
}

/// `M x = b_x`, `M y = b_y` over all vertices in system order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
    pub layout: BlockLayout,
}

impl LinearSystem {
    /// Builds `M` from interior rows (system-indexed entries) and identity
    /// boundary rows; boundary coordinates go to `b_x`, `b_y`.
    pub(crate) fn from_interior_rows(
        layout: BlockLayout,
        interior_entries: &[(usize, usize, f64)],
        boundary: &[Point],
    ) -> Self {
        let n = layout.dim();
        let mut t = interior_entries.to_vec();
        for k in layout.n_interior..n {
            t.push((k, k, 1.0));
        }
        let mut bx = vec![0.0; n];
        let mut by = vec![0.0; n];
        for (k, p) in boundary.iter().enumerate() {
            bx[layout.n_interior + k] = p.x;
            by[layout.n_interior + k] = p.y;
        }
        Self {
            matrix: CsrMatrix::from_triplets(n, n, &t),
            bx,
            by,
            layout,
        }
    }

    /// The `N_I x N_I` interior block.
    pub fn interior_block(&self) -> CsrMatrix {
        let ni = self.layout.n_interior;
        self.matrix.block(0..ni, 0..ni)
    }

    /// The `N_I x N_B` interior-to-boundary block.
    pub fn coupling_block(&self) -> CsrMatrix {
        let ni = self.layout.n_interior;
        self.matrix.block(0..ni, ni..self.layout.dim())
    }

    /// `max(|Mx - b_x| / |b_x|, |My - b_y| / |b_y|)` (absolute when `b` is 0).
    pub fn relative_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let rel = |sol: &[f64], b: &[f64]| {
            let r = self.matrix.mul_vec(sol);
            let rn = r.iter().zip(b).map(|(ri, bi)| (ri - bi).powi(2)).sum::<f64>().sqrt();
            let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if bn > 0.0 {
                rn / bn
            } else {
                rn
            }
        };
        rel(x, &self.bx).max(rel(y, &self.by))
    }
}

/// Full solution vectors in system order.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual: f64,
}

impl SystemSolution {
    pub fn interior(&self, n_interior: usize) -> Vec<Point> {
        (0..n_interior).map(|k| Point::new(self.x[k], self.y[k])).collect()
    }
}

/// Assembles the Tutte system: interior row `i` reads `x_i - Σ w_ij x_j = 0`.
pub fn assemble_tutte_system(
    t: &Triangulation,
    polygon: &BoundaryPolygon,
    w: &WeightScheme,
) -> Result<LinearSystem, EmbedError> {
    if polygon.len() != t.n_boundary() {
        return Err(EmbedError::DimensionMismatch {
            what: "boundary polygon",
            expected: t.n_boundary(),
            got: polygon.len(),
        });
    }
    if w.rows.len() != t.n_interior() {
        return Err(EmbedError::DimensionMismatch {
            what: "weight rows",
            expected: t.n_interior(),
            got: w.rows.len(),
        });
    }
    let layout = BlockLayout {
        n_interior: t.n_interior(),
        n_boundary: t.n_boundary(),
    };
    let mut entries = Vec::new();
    for (k, row) in w.rows.iter().enumerate() {
        entries.push((k, k, 1.0));
        for &(j, wij) in row {
            entries.push((k, t.system_index(j), -wij));
        }
    }
    Ok(LinearSystem::from_interior_rows(layout, &entries, polygon.points()))
}

/// Solves both coordinate systems by eliminating the boundary rows and
/// factoring the interior block, with up to four rounds of iterative
/// refinement. Fails if the relative residual stays above `tol`.
pub fn solve(system: &LinearSystem, tol: f64) -> Result<SystemSolution, SolveError> {
    let ni = system.layout.n_interior;
    let n = system.layout.dim();
    let mut x = system.bx.clone();
    let mut y = system.by.clone();
    if ni > 0 {
        let a = system.interior_block();
        let c = system.coupling_block();
        let lu = SkylineLu::factor(&a)?;
        for (sol, b) in [(&mut x, &system.bx), (&mut y, &system.by)] {
            let cb = c.mul_vec(&b[ni..n]);
            let rhs: Vec<f64> = (0..ni).map(|k| b[k] - cb[k]).collect();
            let mut xi = lu.solve(&rhs);
            for _ in 0..4 {
                let ax = a.mul_vec(&xi);
                let r: Vec<f64> = rhs.iter().zip(&ax).map(|(p, q)| p - q).collect();
                let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                let bn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
                if rn <= 1e-3 * tol * bn.max(f64::MIN_POSITIVE) {
                    break;
                }
                let dx = lu.solve(&r);
                for (v, d) in xi.iter_mut().zip(dx) {
                    *v += d;
                }
            }
            sol[..ni].copy_from_slice(&xi);
        }
    }
    let residual = system.relative_residual(&x, &y);
    if residual.is_nan() || residual > tol {
        return Err(SolveError::ResidualTooLarge {
            residual,
            tolerance: tol,
        });
    }
    Ok(SystemSolution { x, y, residual })
}

/// Builds an [`Embedding`] from a system solution.
pub(crate) fn embedding_from_solution(
    t: &Arc<Triangulation>,
    polygon: &BoundaryPolygon,
    sol: &SystemSolution,
    info: SolverInfo,
) -> Embedding {
    let mut coords = vec![Point::origin(); t.vertex_count()];
    for (k, &v) in t.interior_vertices().iter().enumerate() {
        coords[v] = Point::new(sol.x[k], sol.y[k]);
    }
    // boundary coordinates are copied, not taken from the solve
    for (&v, p) in t.boundary_cycle().iter().zip(polygon.points()) {
        coords[v] = *p;
    }
    Embedding::new(t.clone(), coords, info)
}

/// An embedding together with its validity certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Certified {
    pub embedding: Embedding,
    pub report: ValidityReport,
}

/// Tutte embedding of a problem with a convex boundary.
pub fn tutte_embed(problem: &Problem, w: &WeightScheme, tol: f64) -> Result<Certified, EmbedError> {
    let polygon = problem.polygon();
    if !polygon.is_convex() {
        return Err(EmbedError::BoundaryNotConvex {
            reflex: polygon
                .reflex_vertices()
                .into_iter()
                .map(|k| problem.triangulation().boundary_cycle()[k])
                .collect(),
        });
    }
    let t = problem.triangulation();
    let system = assemble_tutte_system(t, polygon, w)?;
    let sol = solve(&system, tol)?;
    let embedding = embedding_from_solution(
        t,
        polygon,
        &sol,
        SolverInfo {
            method: Method::Tutte,
            residual: Some(sol.residual),
            tolerance: Some(tol),
            epsilon: None,
            halvings: None,
        },
    );
    let report = validate(&embedding, polygon);
    Ok(Certified { embedding, report })
}
