//! Embeddings of strictly star-shaped polygons via an ε-weighted length
//! energy.
//!
//! For `0 < ε < 1` the energy
//!
//! ```text
//! E^W(ε) = (1-ε)/(2 M_I) Σ_{E_I^I} L_ij² + (ε/2) Σ_{E_I^B} w_ij L_ij²
//! ```
//!
//! has a unique minimizer given by `S(ε) x_I = ε W x_B`, where `S(ε)` is the
//! symmetric, strictly diagonally dominant interior block with off-diagonal
//! entries `-(1-ε)/M_I` on interior-interior edges. As `ε → 0`, every interior
//! vertex converges to `Σ_j λ_j v_j^B` with `λ_j` the column sums of `W`.
//! Choosing `W(i,j) = λ_j / (deg(v_j^B) - 2)` for convex-combination
//! coefficients `λ` of an eye makes that limit the eye; [`star_embed`] then
//! halves `ε` from `1/2` until the solution validates.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::embedding::{Embedding, Method, SolverInfo};
use crate::error::EmbedError;
use crate::mesh::Triangulation;
use crate::polygon::{BoundaryPolygon, EyeCoefficients, Point, Vector};
use crate::problem::Problem;
use crate::sparse::CsrMatrix;
use crate::tutte::{embedding_from_solution, solve, BlockLayout, Certified, LinearSystem, DEFAULT_TOL};
use crate::validate::validate;

pub const DEFAULT_EPS0: f64 = 0.5;
pub const DEFAULT_MAX_HALVINGS: u32 = 60;
/// Largest `N_I` for the dense spectral diagnostics.
pub const DEFAULT_EIGEN_BUDGET: usize = 2000;

/// Residual tolerance for a solve at `ε`; the condition number of `S(ε)`
/// grows like `1/ε`.
pub fn epsilon_tolerance(eps: f64) -> f64 {
    DEFAULT_TOL.max(1e-16 / eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingFlavor {
    /// `W(i,j) = 1/M_B` on every interior-boundary edge.
    Uniform,
    /// `W(i,j) = λ_j / (deg(v_j^B) - 2)`.
    EyeTargeted,
}

/// Which coupling to build.
#[derive(Debug, Clone, Copy)]
pub enum CouplingSpec<'a> {
    Uniform,
    Eye(&'a EyeCoefficients),
}

/// The `N_I x N_B` matrix `W` coupling interior vertices (system order) to
/// boundary vertices (cycle order).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCouplingMatrix {
    matrix: CsrMatrix,
    flavor: CouplingFlavor,
}

impl BoundaryCouplingMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn flavor(&self) -> CouplingFlavor {
        self.flavor
    }

    pub fn get(&self, interior: usize, boundary: usize) -> f64 {
        self.matrix.get(interior, boundary)
    }

    pub fn total(&self) -> f64 {
        (0..self.matrix.nrows())
            .flat_map(|i| self.matrix.row(i).map(|(_, v)| v))
            .sum()
    }

    pub fn row_sum(&self, interior: usize) -> f64 {
        self.matrix.row(interior).map(|(_, v)| v).sum()
    }

    /// `λ_j = Σ_i W(i,j)`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.matrix.ncols()];
        for i in 0..self.matrix.nrows() {
            for (j, v) in self.matrix.row(i) {
                out[j] += v;
            }
        }
        out
    }

    /// `Σ_j λ_j v_j^B` with `λ` the column sums.
    pub fn limit_point(&self, polygon: &BoundaryPolygon) -> Point {
        let v = self
            .column_sums()
            .iter()
            .zip(polygon.points())
            .fold(Vector::zeros(), |acc, (l, p)| acc + p.coords * *l);
        Point::from(v)
    }
}

fn require_no_dividing_edges(t: &Triangulation) -> Result<(), EmbedError> {
    let d = t.find_dividing_edges();
    if d.is_empty() {
        Ok(())
    } else {
        Err(EmbedError::DividingEdgePresent(d))
    }
}

pub fn build_coupling(t: &Triangulation, spec: CouplingSpec<'_>) -> Result<BoundaryCouplingMatrix, EmbedError> {
    require_no_dividing_edges(t)?;
    if t.n_interior() == 0 {
        return Err(EmbedError::NoInteriorVertices);
    }
    let (ni, nb) = (t.n_interior(), t.n_boundary());
    let mut triplets = Vec::with_capacity(t.m_boundary());
    let flavor = match spec {
        CouplingSpec::Uniform => {
            let w = 1.0 / t.m_boundary() as f64;
            for &(i, b) in t.interior_boundary_edges() {
                triplets.push((t.system_index(i), t.system_index(b) - ni, w));
            }
            CouplingFlavor::Uniform
        }
        CouplingSpec::Eye(coeffs) => {
            if coeffs.lambda.len() != nb {
                return Err(EmbedError::DimensionMismatch {
                    what: "eye coefficients",
                    expected: nb,
                    got: coeffs.lambda.len(),
                });
            }
            for (j, &b) in t.boundary_cycle().iter().enumerate() {
                if t.degree(b) <= 2 && coeffs.lambda[j] > 0.0 {
                    return Err(EmbedError::DegreeTwoBoundaryVertex(b));
                }
            }
            for &(i, b) in t.interior_boundary_edges() {
                let j = t.system_index(b) - ni;
                let w = coeffs.lambda[j] / (t.degree(b) - 2) as f64;
                triplets.push((t.system_index(i), j, w));
            }
            CouplingFlavor::EyeTargeted
        }
    };
    Ok(BoundaryCouplingMatrix {
        matrix: CsrMatrix::from_triplets(ni, nb, &triplets),
        flavor,
    })
}

/// The assembled `M(ε)` with its blocks `S(ε)`, `-εW` and `Id`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSystem {
    pub epsilon: f64,
    pub system: LinearSystem,
}

impl EpsilonSystem {
    pub fn s_block(&self) -> CsrMatrix {
        self.system.interior_block()
    }
}

fn check_epsilon(eps: f64) -> Result<(), EmbedError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(EmbedError::EpsilonOutOfRange(eps))
    }
}

/// Off-diagonal and diagonal entries of `S(ε)` in system order.
fn s_entries(t: &Triangulation, w: &BoundaryCouplingMatrix, eps: f64) -> Vec<(usize, usize, f64)> {
    let ni = t.n_interior();
    let mut entries = Vec::new();
    let mut diag = vec![0.0; ni];
    if t.m_interior() > 0 {
        let off = (1.0 - eps) / t.m_interior() as f64;
        for &(a, b) in t.interior_interior_edges() {
            let (i, j) = (t.system_index(a), t.system_index(b));
            entries.push((i, j, -off));
            entries.push((j, i, -off));
            diag[i] += off;
            diag[j] += off;
        }
    }
    for (i, d) in diag.into_iter().enumerate() {
        entries.push((i, i, d + eps * w.row_sum(i)));
    }
    entries
}

pub fn assemble_epsilon_system(
    t: &Triangulation,
    polygon: &BoundaryPolygon,
    w: &BoundaryCouplingMatrix,
    eps: f64,
) -> Result<EpsilonSystem, EmbedError> {
    check_epsilon(eps)?;
    if polygon.len() != t.n_boundary() {
        return Err(EmbedError::DimensionMismatch {
            what: "boundary polygon",
            expected: t.n_boundary(),
            got: polygon.len(),
        });
    }
    let ni = t.n_interior();
    let layout = BlockLayout {
        n_interior: ni,
        n_boundary: t.n_boundary(),
    };
    let mut entries = s_entries(t, w, eps);
    for i in 0..ni {
        for (j, v) in w.matrix.row(i) {
            entries.push((i, ni + j, -eps * v));
        }
    }
    Ok(EpsilonSystem {
        epsilon: eps,
        system: LinearSystem::from_interior_rows(layout, &entries, polygon.points()),
    })
}

/// Minimizer of `E^W(ε)`; validity is not checked here.
pub fn solve_at_epsilon(problem: &Problem, w: &BoundaryCouplingMatrix, eps: f64) -> Result<Embedding, EmbedError> {
    let t = problem.triangulation();
    let sys = assemble_epsilon_system(t, problem.polygon(), w, eps)?;
    let tol = epsilon_tolerance(eps);
    let sol = solve(&sys.system, tol)?;
    Ok(embedding_from_solution(
        t,
        problem.polygon(),
        &sol,
        SolverInfo {
            method: Method::Epsilon,
            residual: Some(sol.residual),
            tolerance: Some(tol),
            epsilon: Some(eps),
            halvings: None,
        },
    ))
}

/// Closed-form limit of the interior vertices as `ε → 0`.
///
/// Uniform coupling uses `λ_j = (deg(v_j^B) - 2) / M_B`; eye-targeted
/// coupling uses the eye coefficients directly.
pub fn limit_point(t: &Triangulation, polygon: &BoundaryPolygon, spec: CouplingSpec<'_>) -> Result<Point, EmbedError> {
    let lambda: Vec<f64> = match spec {
        CouplingSpec::Uniform => {
            require_no_dividing_edges(t)?;
            let mb = t.m_boundary() as f64;
            t.boundary_cycle()
                .iter()
                .map(|&b| (t.degree(b) as f64 - 2.0) / mb)
                .collect()
        }
        CouplingSpec::Eye(c) => c.lambda.clone(),
    };
    let v = lambda
        .iter()
        .zip(polygon.points())
        .fold(Vector::zeros(), |acc, (l, p)| acc + p.coords * *l);
    Ok(Point::from(v))
}

/// Value of `E^W(ε)` at the given coordinates.
pub fn energy_value(e: &Embedding, w: &BoundaryCouplingMatrix, eps: f64) -> f64 {
    let t = e.triangulation();
    let ni = t.n_interior();
    let len2 = |a: usize, b: usize| (e.position(a) - e.position(b)).norm_squared();
    let inner = if t.m_interior() > 0 {
        let s: f64 = t.interior_interior_edges().iter().map(|&(a, b)| len2(a, b)).sum();
        (1.0 - eps) / (2.0 * t.m_interior() as f64) * s
    } else {
        0.0
    };
    let outer: f64 = t
        .interior_boundary_edges()
        .iter()
        .map(|&(i, b)| w.get(t.system_index(i), t.system_index(b) - ni) * len2(i, b))
        .sum();
    inner + 0.5 * eps * outer
}

/// Eigen-diagnostics of `S(ε)` near `ε = 0`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralReport {
    pub epsilon: f64,
    /// Smallest eigenvalue of `S(ε)`.
    pub lambda_min: f64,
    /// `λ_min / ε`, which tends to `1/N_I`.
    pub lambda_min_over_eps: f64,
    /// Second-smallest eigenvalue (absent when `N_I = 1`).
    pub lambda_second: Option<f64>,
    /// `|ε S(ε)^{-1} - 𝟙|_2` with `𝟙` the all-ones matrix.
    pub inverse_deviation: f64,
    /// `|v_1 - 1/√N_I|_∞` for the lowest eigenvector, up to sign.
    pub eigenvector_deviation: f64,
}

/// Dense `S(ε)`.
pub fn s_matrix(t: &Triangulation, w: &BoundaryCouplingMatrix, eps: f64) -> Result<DMatrix<f64>, EmbedError> {
    check_epsilon(eps)?;
    let ni = t.n_interior();
    let mut m = DMatrix::zeros(ni, ni);
    for (i, j, v) in s_entries(t, w, eps) {
        m[(i, j)] += v;
    }
    Ok(m)
}

pub fn spectral_report(
    t: &Triangulation,
    w: &BoundaryCouplingMatrix,
    eps: f64,
    budget: usize,
) -> Result<SpectralReport, EmbedError> {
    let ni = t.n_interior();
    if ni > budget {
        return Err(EmbedError::BudgetExceeded { n: ni, budget });
    }
    let s = s_matrix(t, w, eps)?;
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..ni).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambda_min = eig.eigenvalues[order[0]];
    let lambda_second = order.get(1).map(|&k| eig.eigenvalues[k]);

    // ε S^{-1} - 𝟙 from the eigen-decomposition
    let mut dev = DMatrix::from_element(ni, ni, -1.0);
    for k in 0..ni {
        let v = eig.eigenvectors.column(k);
        let scale = eps / eig.eigenvalues[k];
        for a in 0..ni {
            for b in 0..ni {
                dev[(a, b)] += scale * v[a] * v[b];
            }
        }
    }
    let inverse_deviation = if ni == 1 {
        dev[(0, 0)].abs()
    } else {
        SymmetricEigen::new(dev)
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    };

    let v1 = eig.eigenvectors.column(order[0]);
    let c = 1.0 / (ni as f64).sqrt();
    let dev_sign = |s: f64| v1.iter().fold(0.0f64, |m, x| m.max((s * x - c).abs()));
    let eigenvector_deviation = dev_sign(1.0).min(dev_sign(-1.0));

    Ok(SpectralReport {
        epsilon: eps,
        lambda_min,
        lambda_min_over_eps: lambda_min / eps,
        lambda_second,
        inverse_deviation,
        eigenvector_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarOptions {
    pub eps0: f64,
    pub max_halvings: u32,
    /// Overrides the kernel-centroid eye; must lie in the open kernel.
    pub eye: Option<Point>,
}

impl Default for StarOptions {
    fn default() -> Self {
        Self {
            eps0: DEFAULT_EPS0,
            max_halvings: DEFAULT_MAX_HALVINGS,
            eye: None,
        }
    }
}

/// Eye, coefficients and eye-targeted coupling for a problem.
pub fn eye_coupling(
    problem: &Problem,
    eye: Option<Point>,
) -> Result<(EyeCoefficients, BoundaryCouplingMatrix), EmbedError> {
    let polygon = problem.polygon();
    let eye = match eye {
        Some(e) => {
            polygon.check_eye(&e)?;
            e
        }
        None => polygon.select_eye().map_err(|_| EmbedError::NotStarShaped)?,
    };
    let coeffs = polygon.eye_coefficients(&eye)?;
    let w = build_coupling(problem.triangulation(), CouplingSpec::Eye(&coeffs))?;
    Ok((coeffs, w))
}

/// Solves at `ε0, ε0/2, ε0/4, …` with the eye-targeted coupling and returns
/// the first fully valid embedding.
///
/// Without interior-interior edges the solution does not depend on `ε`, so a
/// single solve is made.
pub fn star_embed(problem: &Problem, opts: &StarOptions) -> Result<Certified, EmbedError> {
    check_epsilon(opts.eps0)?;
    let t = problem.triangulation();
    let polygon = problem.polygon();
    if !polygon.is_strictly_star_shaped() {
        return Err(EmbedError::NotStarShaped);
    }
    require_no_dividing_edges(t)?;
    if t.n_interior() == 0 {
        return Err(EmbedError::NoInteriorVertices);
    }
    let (_, w) = eye_coupling(problem, opts.eye)?;

    let max_halvings = if t.m_interior() == 0 { 0 } else { opts.max_halvings };
    let mut eps = opts.eps0;
    let mut last = None;
    for h in 0..=max_halvings {
        let mut embedding = solve_at_epsilon(problem, &w, eps)?;
        embedding.info.halvings = Some(h);
        let report = validate(&embedding, polygon);
        if report.valid {
            return Ok(Certified { embedding, report });
        }
        last = Some((embedding, report));
        if h < max_halvings {
            eps *= 0.5;
        }
    }
    let (embedding, report) = last.expect("at least one solve");
    Err(EmbedError::HalvingExhausted {
        halvings: max_halvings,
        epsilon: eps,
        last: Box::new(embedding),
        report: Box::new(report),
    })
}
