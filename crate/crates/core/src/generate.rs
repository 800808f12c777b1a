//! Seeded random instances.
//!
//! Triangulations start as a fan around one interior vertex, are refined by
//! splitting faces and then shuffled by edge flips. Flips never create an
//! edge between two boundary vertices, so the results have no dividing edges.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Triangulation;
use crate::polygon::Point;
use crate::problem::Problem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A disk with boundary `0..nb` in cycle order and `ni >= 1` interior
/// vertices numbered from `nb`.
///
/// # Panics
/// If `nb < 3` or `ni == 0`.
pub fn random_disk<R: Rng>(rng: &mut R, nb: usize, ni: usize, flips: usize) -> Triangulation {
    assert!(nb >= 3 && ni >= 1, "need a polygon and an interior vertex");
    let centre = nb;
    let mut faces: Vec<[usize; 3]> = (0..nb).map(|k| [k, (k + 1) % nb, centre]).collect();
    for v in nb + 1..nb + ni {
        let k = rng.random_range(0..faces.len());
        let [a, b, c] = faces[k];
        faces[k] = [a, b, v];
        faces.push([b, c, v]);
        faces.push([c, a, v]);
    }
    for _ in 0..flips {
        try_flip(rng, &mut faces, nb);
    }
    Triangulation::new(nb + ni, &faces).expect("generated faces form a disk")
}

fn try_flip<R: Rng>(rng: &mut R, faces: &mut [[usize; 3]], nb: usize) -> bool {
    let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (k, f) in faces.iter().enumerate() {
        for s in 0..3 {
            directed.insert((f[s], f[(s + 1) % 3]), k);
        }
    }
    let interior: Vec<(usize, usize)> = directed
        .keys()
        .filter(|&&(a, b)| a < b && directed.contains_key(&(b, a)))
        .copied()
        .collect();
    if interior.is_empty() {
        return false;
    }
    let (a, b) = interior[rng.random_range(0..interior.len())];
    let (f1, f2) = (directed[&(a, b)], directed[&(b, a)]);
    let third = |f: [usize; 3]| f.into_iter().find(|&x| x != a && x != b).unwrap();
    let (c, d) = (third(faces[f1]), third(faces[f2]));
    if directed.contains_key(&(c, d)) || directed.contains_key(&(d, c)) || (c < nb && d < nb) {
        return false;
    }
    // (a, b, c) and (b, a, d) become (a, d, c) and (d, b, c)
    faces[f1] = [a, d, c];
    faces[f2] = [d, b, c];
    true
}

/// Angles in `[0, 2π)` with consecutive gaps in a bounded ratio, so that
/// no gap reaches π for `n >= 3`.
fn angles<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let gaps: Vec<f64> = (0..n).map(|_| rng.random_range(0.75..1.25)).collect();
    let total: f64 = gaps.iter().sum();
    let start = rng.random_range(0.0..TAU);
    let mut acc = 0.0;
    gaps.iter()
        .map(|g| {
            let a = start + TAU * acc / total;
            acc += g;
            a
        })
        .collect()
}

/// Points on a circle, counterclockwise.
pub fn convex_polygon<R: Rng>(rng: &mut R, n: usize) -> Vec<Point> {
    let r = rng.random_range(0.5..2.0);
    let c = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    angles(rng, n)
        .into_iter()
        .map(|t| Point::new(c.x + r * t.cos(), c.y + r * t.sin()))
        .collect()
}

/// Radial polygon around the origin with radii in `[0.3, 1]`; the origin is
/// in the open kernel.
pub fn star_polygon<R: Rng>(rng: &mut R, n: usize) -> Vec<Point> {
    angles(rng, n)
        .into_iter()
        .map(|t| {
            let r = rng.random_range(0.3..1.0);
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

/// A triangle `a, b, c` followed by a point strictly inside it.
pub fn reflex_quad_polygon<R: Rng>(rng: &mut R) -> Vec<Point> {
    let tri = convex_polygon(rng, 3);
    let w = [
        rng.random_range(0.2..1.0),
        rng.random_range(0.05..0.3),
        rng.random_range(0.2..1.0),
    ];
    let s: f64 = w.iter().sum();
    let r = tri
        .iter()
        .zip(w)
        .fold(nalgebra::Vector2::zeros(), |acc, (p, wk)| acc + p.coords * (wk / s));
    let mut out = tri;
    out.push(Point::from(r));
    out
}

fn attach(t: Triangulation, points: Vec<Point>) -> Problem {
    let coords: Vec<(usize, Point)> = points.into_iter().enumerate().collect();
    Problem::new(t, &coords).expect("generated polygon is simple")
}

/// Random convex polygon with `3..=max_nb` vertices and `1..=max_ni`
/// interior vertices.
pub fn convex_instance(seed: u64, max_nb: usize, max_ni: usize) -> Problem {
    let mut r = rng(seed);
    let nb = r.random_range(3..=max_nb.max(3));
    let ni = r.random_range(1..=max_ni.max(1));
    let pts = convex_polygon(&mut r, nb);
    let t = random_disk(&mut r, nb, ni, 2 * ni);
    attach(t, pts)
}

/// Random strictly star-shaped polygon with `4..=max_nb` vertices.
pub fn star_instance(seed: u64, max_nb: usize, max_ni: usize) -> Problem {
    let mut r = rng(seed);
    let nb = r.random_range(4..=max_nb.max(4));
    let ni = r.random_range(1..=max_ni.max(1));
    let pts = star_polygon(&mut r, nb);
    let t = random_disk(&mut r, nb, ni, 2 * ni);
    attach(t, pts)
}

/// Random quadrilateral with one reflex vertex.
pub fn quad_instance(seed: u64, max_ni: usize) -> Problem {
    let mut r = rng(seed);
    let ni = r.random_range(1..=max_ni.max(1));
    let pts = reflex_quad_polygon(&mut r);
    let t = random_disk(&mut r, 4, ni, 2 * ni);
    attach(t, pts)
}
