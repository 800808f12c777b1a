use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

use starembed::embedding::SolverInfo;
use starembed::generate::{self, random_disk};
use starembed::io::{parse_embedding, parse_problem, write_embedding, write_problem};
use starembed::polygon::{orient, segments_intersect};
use starembed::quad::{homotopy_path, line_path, projective_from_quads, transport_embedding, QuadInstance};
use starembed::star::{
    assemble_epsilon_system, eye_coupling, s_matrix, solve_at_epsilon, spectral_report, CouplingSpec,
    DEFAULT_EIGEN_BUDGET,
};
use starembed::tutte::{normalize_weights, DEFAULT_TOL};
use starembed::validate::check_crossings;
use starembed::{tutte_embed, validate, BoundaryPolygon, Embedding, Point, Problem, RawWeights, Triangulation};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn tutte(p: &Problem, seed: u64) -> Embedding {
    let t = p.triangulation();
    let w = normalize_weights(t, &RawWeights::random(t, seed)).unwrap();
    tutte_embed(p, &w, DEFAULT_TOL).unwrap().embedding
}

/// Bounding-box prefilter followed by strict orientation tests.
fn crossings_reference(e: &Embedding, tol: f64) -> Vec<((usize, usize), (usize, usize))> {
    let edges = e.triangulation().edges();
    let mut out = Vec::new();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let ((a, b), (c, d)) = (edges[i], edges[j]);
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let (pa, pb, pc, pd) = (e.position(a), e.position(b), e.position(c), e.position(d));
            let slack = tol.sqrt();
            if pa.x.max(pb.x) + slack < pc.x.min(pd.x)
                || pc.x.max(pd.x) + slack < pa.x.min(pb.x)
                || pa.y.max(pb.y) + slack < pc.y.min(pd.y)
                || pc.y.max(pd.y) + slack < pa.y.min(pb.y)
            {
                continue;
            }
            let o1 = orient(&pa, &pb, &pc);
            let o2 = orient(&pa, &pb, &pd);
            let o3 = orient(&pc, &pd, &pa);
            let o4 = orient(&pc, &pd, &pb);
            let proper = o1 * o2 < 0.0 && o3 * o4 < 0.0 && o1.abs() > tol && o2.abs() > tol && o3.abs() > tol && o4.abs() > tol;
            if proper || segments_intersect(&pa, &pb, &pc, &pd, tol) {
                out.push((edges[i], edges[j]));
            }
        }
    }
    out
}

fn max_gap(e: &Embedding, v: usize) -> f64 {
    let p = e.position(v);
    let mut a: Vec<f64> = e
        .triangulation()
        .vertex_neighbors(v)
        .iter()
        .map(|&w| {
            let d = e.position(w) - p;
            d.y.atan2(d.x)
        })
        .collect();
    a.sort_by(f64::total_cmp);
    let wrap = a[0] + 2.0 * PI - a[a.len() - 1];
    a.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn edge_face_count(seed in any::<u64>()) {
        let mut r = generate::rng(seed);
        let nb = r.random_range(3..12);
        let ni = r.random_range(1..40);
        let t = random_disk(&mut r, nb, ni, 2 * ni);
        prop_assert_eq!(2 * t.edges().len(), 3 * t.faces().len() + t.n_boundary());
        let s: usize = t.boundary_cycle().iter().map(|&b| t.degree(b) - 2).sum();
        prop_assert_eq!(s, t.m_boundary());
    }

    #[test]
    fn construction_ignores_face_order_and_rotation(seed in any::<u64>()) {
        let mut r = generate::rng(seed);
        let (nb, ni) = (r.random_range(3..9), r.random_range(1..20));
        let t = random_disk(&mut r, nb, ni, 20);
        let mut faces = t.faces().to_vec();
        for f in &mut faces {
            f.rotate_left(r.random_range(0..3));
        }
        for k in (1..faces.len()).rev() {
            faces.swap(k, r.random_range(0..=k));
        }
        let u = Triangulation::new(t.vertex_count(), &faces).unwrap();
        prop_assert_eq!(u.boundary_cycle(), t.boundary_cycle());
        prop_assert_eq!(u.edges(), t.edges());
        prop_assert_eq!(u.interior_vertices(), t.interior_vertices());
        prop_assert_eq!(u.interior_boundary_edges(), t.interior_boundary_edges());
        for v in 0..t.vertex_count() {
            prop_assert_eq!(u.vertex_neighbors(v), t.vertex_neighbors(v));
        }
    }

    #[test]
    fn convex_kernel_is_the_polygon(seed in any::<u64>()) {
        let mut r = generate::rng(seed);
        let n = r.random_range(3..12);
        let p = BoundaryPolygon::new(generate::convex_polygon(&mut r, n)).unwrap();
        let k = p.kernel();
        for v in p.points() {
            prop_assert!(k.vertices.iter().any(|q| (q - v).norm() < 1e-9));
        }
        for q in &k.vertices {
            prop_assert!(p.points().iter().any(|v| (q - v).norm() < 1e-9));
        }
        prop_assert!(p.reflex_vertices().is_empty());
        prop_assert!(p.is_convex());
    }

    #[test]
    fn star_kernel_inside_and_visible(seed in any::<u64>()) {
        let mut r = generate::rng(seed);
        let n = r.random_range(4..11);
        let p = BoundaryPolygon::new(generate::star_polygon(&mut r, n)).unwrap();
        let k = p.kernel();
        prop_assert!(p.is_strictly_star_shaped());
        prop_assert_eq!(p.reflex_vertices().is_empty(), p.is_convex());
        let c = k.centroid().unwrap();
        for s in 0..20 {
            // points between the centroid and each kernel vertex
            let v = k.vertices[s % k.vertices.len()];
            let q = c + (v - c) * (0.05 * (s / k.vertices.len()) as f64 + 0.5);
            prop_assert!(p.contains(&q));
            for (j, pv) in p.points().iter().enumerate() {
                for m in 1..10 {
                    let x = q + (pv - q) * (m as f64 / 10.0);
                    prop_assert!(p.contains(&x), "{:?} does not see vertex {}", q, j);
                }
            }
        }
    }

    #[test]
    fn eye_coefficient_invariants(seed in any::<u64>()) {
        let mut r = generate::rng(seed);
        let n = r.random_range(4..11);
        let p = BoundaryPolygon::new(generate::star_polygon(&mut r, n)).unwrap();
        let eye = p.select_eye().unwrap();
        prop_assert!(p.in_open_kernel(&eye));
        let c = p.eye_coefficients(&eye).unwrap();
        prop_assert!(c.lambda.iter().all(|&l| l > 0.0));
        prop_assert!((c.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let rep = c.lambda.iter().zip(p.points()).fold(nalgebra::Vector2::zeros(), |a, (l, v)| a + v.coords * *l);
        prop_assert!((rep - eye.coords).norm() < 1e-9 * p.diameter());
    }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn tutte_valid_with_maximum_principle(seed in any::<u64>()) {
        let p = generate::convex_instance(seed, 12, 50);
        let e = tutte(&p, seed);
        prop_assert!(validate(&e, p.polygon()).valid);
        for &v in e.triangulation().interior_vertices() {
            prop_assert!(max_gap(&e, v) < PI);
        }
    }

    #[test]
    fn tutte_scaling_one_row_is_invisible(seed in any::<u64>(), factor in 0.01f64..100.0) {
        let p = generate::convex_instance(seed, 10, 30);
        let t = p.triangulation();
        let raw = RawWeights::random(t, seed);
        let mut rows = raw.rows().to_vec();
        let k = (seed as usize) % rows.len();
        rows[k].iter_mut().for_each(|c| *c *= factor);
        let scaled = RawWeights::from_rows(t, rows).unwrap();
        let (w1, w2) = (normalize_weights(t, &raw).unwrap(), normalize_weights(t, &scaled).unwrap());
        let e1 = tutte_embed(&p, &w1, DEFAULT_TOL).unwrap().embedding;
        let e2 = tutte_embed(&p, &w2, DEFAULT_TOL).unwrap().embedding;
        prop_assert!(e1.max_displacement(&e2) < 1e-12 * p.polygon().diameter().max(1.0));
    }

    #[test]
    fn tutte_affine_equivariance(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0, tx in -5.0f64..5.0) {
        let p = generate::convex_instance(seed, 10, 30);
        let m = nalgebra::Matrix2::new(2.0 + a.abs(), b, 0.3 * a, 1.5 + b.abs());
        let shift = nalgebra::Vector2::new(tx, -tx);
        let moved: Vec<(usize, Point)> = p
            .boundary_coordinates()
            .into_iter()
            .map(|(v, q)| (v, Point::from(m * q.coords + shift)))
            .collect();
        let q = Problem::new((**p.triangulation()).clone(), &moved).unwrap();
        let e1 = tutte(&p, seed);
        let e2 = tutte(&q, seed);
        let scale = q.polygon().diameter();
        for v in 0..e1.coords().len() {
            let want = m * e1.position(v).coords + shift;
            prop_assert!((e2.position(v).coords - want).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn crossings_match_reference(seed in any::<u64>(), perturb in any::<bool>()) {
        let p = generate::convex_instance(seed, 8, 15);
        let mut e = tutte(&p, seed);
        if perturb {
            let mut r = generate::rng(seed ^ 0xabc);
            let mut c = e.coords().to_vec();
            let d = p.polygon().diameter();
            for &v in e.triangulation().interior_vertices() {
                c[v] += nalgebra::Vector2::new(r.random_range(-0.5..0.5), r.random_range(-0.5..0.5)) * d;
            }
            e = Embedding::new(e.triangulation().clone(), c, SolverInfo::given());
        }
        let tol = 2.0 * p.polygon().area_tolerance();
        prop_assert_eq!(check_crossings(&e, tol), crossings_reference(&e, tol));
        prop_assert_eq!(validate(&e, p.polygon()), validate(&e, p.polygon()));
    }

    #[test]
    fn epsilon_system_invariants(seed in any::<u64>(), k in 1i32..20) {
        let p = generate::star_instance(seed, 10, 30);
        let t = p.triangulation();
        let (_, w) = eye_coupling(&p, None).unwrap();
        let eps = 0.5f64.powi(k);
        let sys = assemble_epsilon_system(t, p.polygon(), &w, eps).unwrap();
        let s = sys.s_block();
        let ni = t.n_interior();
        let total: f64 = (0..ni).flat_map(|i| s.row(i).map(|(_, v)| v).collect::<Vec<_>>()).sum();
        prop_assert!((total - eps).abs() < 1e-12);
        for i in 0..ni {
            let r: f64 = sys.system.matrix.row(i).map(|(_, v)| v).sum();
            prop_assert!(r.abs() < 1e-12);
        }
        // x_I = ε S^{-1} W x_B, densely
        let sd = s_matrix(t, &w, eps).unwrap();
        let wd = DMatrix::from_fn(ni, t.n_boundary(), |i, j| w.get(i, j));
        let bx = DVector::from_iterator(t.n_boundary(), p.polygon().points().iter().map(|q| q.x));
        let by = DVector::from_iterator(t.n_boundary(), p.polygon().points().iter().map(|q| q.y));
        let lu = sd.lu();
        let xd = lu.solve(&(&wd * bx * eps)).unwrap();
        let yd = lu.solve(&(&wd * by * eps)).unwrap();
        let e = solve_at_epsilon(&p, &w, eps).unwrap();
        for (k, q) in e.interior_positions().iter().enumerate() {
            prop_assert!((q.x - xd[k]).abs() < 1e-9 && (q.y - yd[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn embedding_documents_round_trip(seed in any::<u64>()) {
        let p = generate::convex_instance(seed, 10, 20);
        let e = tutte(&p, seed);
        let r = validate(&e, p.polygon());
        let text = write_embedding(&e, Some(&r));
        let (back, report) = parse_embedding(&text).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(report.as_ref(), Some(&r));
        prop_assert_eq!(write_embedding(&back, report.as_ref()), text);
        let doc = write_problem(&p, None, None);
        let q = parse_problem(&doc, true).unwrap().problem;
        prop_assert_eq!(q.triangulation(), p.triangulation());
        prop_assert_eq!(q.polygon(), p.polygon());
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn homography_composition_and_inverse(seed in any::<u64>()) {
        let mut r = generate::rng(seed);
        let a = generate::reflex_quad_polygon(&mut r);
        let q: [Point; 4] = std::array::from_fn(|k| a[k]);
        let [h0, h1, h2] = [q[0], q[1], q[2]];
        let inside = |r: &mut rand_chacha::ChaCha8Rng| {
            let w = [r.random_range(0.1..1.0), r.random_range(0.05..0.3), r.random_range(0.1..1.0)];
            let s: f64 = w.iter().sum();
            Point::from((h0.coords * w[0] + h1.coords * w[1] + h2.coords * w[2]) / s)
        };
        let b = [h0, h1, h2, inside(&mut r)];
        let c = [h0, h1, h2, inside(&mut r)];
        let ab = projective_from_quads(&q, &b).unwrap();
        let bc = projective_from_quads(&b, &c).unwrap();
        let ac = projective_from_quads(&q, &c).unwrap();
        prop_assert!(ab.then(&bc).scale_distance(&ac) < 1e-9);
        prop_assert!(ab.then(&ab.inverse()).scale_distance(&starembed::ProjectiveTransform::identity()) < 1e-9);
        prop_assert!(ab.determinant() != 0.0);
    }

    #[test]
    fn sections_are_valid(seed in any::<u64>()) {
        let inst = QuadInstance::new(generate::quad_instance(seed, 30)).unwrap();
        let base = inst.base_embedding().unwrap();
        let path = line_path(inst.v0(), inst.hull_centroid(), 12);
        let h = homotopy_path(&inst, &base, &path).unwrap();
        let d = inst.diameter();
        for s in &h.samples {
            prop_assert!(s.is_valid());
            prop_assert!(s.fiber_error <= 1e-10 * d);
            let back = transport_embedding(&s.transform.inverse(), &transport_embedding(&s.transform, &base).unwrap()).unwrap();
            prop_assert!(back.max_displacement(&base) <= 1e-9 * d);
        }
    }
}

#[test]
fn boundary_only_triangle_is_valid() {
    let t = Arc::new(Triangulation::new(3, &[[0, 1, 2]]).unwrap());
    let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
    let e = Embedding::new(t, pts.clone(), SolverInfo::given());
    assert!(validate(&e, &BoundaryPolygon::new(pts).unwrap()).valid);
}

/// Dividing-edge-free instances with at least two interior vertices.
fn spectral_instances() -> Vec<Problem> {
    let mut v = vec![
        starembed::fixtures::square_two_interior(),
        starembed::fixtures::l_shape(),
        starembed::fixtures::reflex_quad(),
    ];
    for seed in 0..5 {
        let mut r = generate::rng(1000 + seed);
        let nb = r.random_range(4..=10);
        let ni = r.random_range(2..=30);
        let pts = generate::star_polygon(&mut r, nb);
        let t = random_disk(&mut r, nb, ni, 2 * ni);
        v.push(Problem::new(t, &pts.into_iter().enumerate().collect::<Vec<_>>()).unwrap());
    }
    v
}

/// Second eigenvalue of the interior-interior Laplacian scaled by `1/M_I`,
/// the `ε → 0` limit of `S(ε)`.
fn limiting_lambda_2(t: &Triangulation) -> f64 {
    let ni = t.n_interior();
    let mi = t.m_interior() as f64;
    let mut l = DMatrix::<f64>::zeros(ni, ni);
    for &(a, b) in t.interior_interior_edges() {
        let (i, j) = (t.system_index(a), t.system_index(b));
        l[(i, j)] -= 1.0 / mi;
        l[(j, i)] -= 1.0 / mi;
        l[(i, i)] += 1.0 / mi;
        l[(j, j)] += 1.0 / mi;
    }
    let mut ev: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

#[test]
fn second_eigenvalue_stays_away() {
    for (k, p) in spectral_instances().iter().enumerate() {
        let t = p.triangulation();
        let w = starembed::star::build_coupling(t, CouplingSpec::Uniform).unwrap();
        let hi = spectral_report(t, &w, 1e-1, DEFAULT_EIGEN_BUDGET).unwrap();
        let lo = spectral_report(t, &w, 1e-6, DEFAULT_EIGEN_BUDGET).unwrap();
        let (a, b) = (lo.lambda_second.unwrap(), hi.lambda_second.unwrap());
        let limit = limiting_lambda_2(t);
        assert!(limit > 0.0, "instance {k}: interior graph disconnected");
        assert!(a >= 0.5 * limit, "instance {k}: {a} vs limit {limit}");
        assert!(a > 100.0 * lo.lambda_min, "instance {k}: lowest eigenvalue not isolated");
        if k < 3 {
            assert!(a > b / 2.0, "instance {k}: {a} vs {b}");
        }
    }
}
