//! Combinatorial triangulations of the closed disk.
//!
//! A [`Triangulation`] is built from a vertex count and a face list and is
//! immutable afterwards. Construction validates the disk topology, repairs
//! inconsistent face orientations and derives the vertex/edge classes the
//! solvers work with: interior vertices `V_I`, the boundary cycle `V_B`,
//! interior-interior edges `E_I^I` and interior-boundary edges `E_I^B`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

/// An undirected edge stored with `lo < hi`.
pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeshError {
    #[error("triangulation has no faces")]
    Empty,
    #[error("face {face} references vertex {vertex}, but there are only {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("face {face} duplicates face {first}")]
    DuplicateFace { face: usize, first: usize },
    #[error("faces cannot be oriented consistently (conflict at face {face})")]
    InconsistentOrientation { face: usize },
    #[error("not a disk: {0}")]
    NotADisk(String),
}

fn not_a_disk(msg: impl Into<String>) -> MeshError {
    MeshError::NotADisk(msg.into())
}

#[inline]
fn edge_key(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A validated triangulation of the 2-disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    boundary_edges: BTreeSet<Edge>,
    boundary_cycle: Vec<usize>,
    interior_vertices: Vec<usize>,
    interior_interior_edges: Vec<Edge>,
    interior_boundary_edges: Vec<Edge>,
    degrees: Vec<usize>,
    on_boundary: Vec<bool>,
    system_index: Vec<usize>,
    fans: Vec<Vec<usize>>,
}

impl Triangulation {
    /// Validates `faces` as a triangulated disk on `vertex_count` vertices.
    ///
    /// Face orientations are propagated breadth-first from face 0; the
    /// global orientation is then fixed so that every boundary edge is
    /// traversed by its face in the direction of [`Self::boundary_cycle`].
    pub fn new(vertex_count: usize, faces: &[[usize; 3]]) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut seen: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= vertex_count {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        vertex: v,
                        vertex_count,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(not_a_disk(format!("face {fi} repeats a vertex")));
            }
            let mut key = *f;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateFace { face: fi, first });
            }
            seen.insert(key, fi);
        }

        let mut edge_faces: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                edge_faces
                    .entry(edge_key(f[k], f[(k + 1) % 3]))
                    .or_default()
                    .push(fi);
            }
        }
        if let Some((e, _)) = edge_faces.iter().find(|(_, fs)| fs.len() > 2) {
            return Err(not_a_disk(format!(
                "edge ({}, {}) is shared by more than two faces",
                e.0, e.1
            )));
        }

        let mut used = vec![false; vertex_count];
        for f in faces {
            for &v in f {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(not_a_disk(format!("vertex {v} belongs to no face")));
        }

        let mut oriented = faces.to_vec();
        orient_faces(&mut oriented, &edge_faces)?;

        let v = vertex_count as i64;
        let e = edge_faces.len() as i64;
        let f = faces.len() as i64;
        if v - e + f != 1 {
            return Err(not_a_disk(format!(
                "Euler characteristic V - E + F = {} (expected 1)",
                v - e + f
            )));
        }

        let boundary_edges: BTreeSet<Edge> = edge_faces
            .iter()
            .filter(|(_, fs)| fs.len() == 1)
            .map(|(e, _)| *e)
            .collect();
        let boundary_cycle = trace_boundary(vertex_count, &boundary_edges)?;

        // Fix the global orientation: the first boundary edge of the cycle
        // must appear in its face with the same direction.
        let (s, n) = (boundary_cycle[0], boundary_cycle[1]);
        let fi = edge_faces[&edge_key(s, n)][0];
        if !has_directed_edge(&oriented[fi], s, n) {
            for face in &mut oriented {
                face.swap(1, 2);
            }
        }

        let mut on_boundary = vec![false; vertex_count];
        for &b in &boundary_cycle {
            on_boundary[b] = true;
        }
        let interior_vertices: Vec<usize> = (0..vertex_count).filter(|&v| !on_boundary[v]).collect();
        let mut system_index = vec![0; vertex_count];
        for (k, &vi) in interior_vertices.iter().enumerate() {
            system_index[vi] = k;
        }
        for (k, &vb) in boundary_cycle.iter().enumerate() {
            system_index[vb] = interior_vertices.len() + k;
        }

        let edges: Vec<Edge> = edge_faces.keys().copied().collect();
        let mut degrees = vec![0; vertex_count];
        let mut interior_interior_edges = Vec::new();
        let mut interior_boundary_edges = Vec::new();
        for &(a, b) in &edges {
            degrees[a] += 1;
            degrees[b] += 1;
            match (on_boundary[a], on_boundary[b]) {
                (false, false) => interior_interior_edges.push((a, b)),
                (false, true) => interior_boundary_edges.push((a, b)),
                (true, false) => interior_boundary_edges.push((b, a)),
                (true, true) => {}
            }
        }
        interior_boundary_edges.sort_unstable();

        let fans = build_fans(vertex_count, &oriented, &on_boundary, &degrees)?;

        Ok(Self {
            vertex_count,
            faces: oriented,
            edges,
            boundary_edges,
            boundary_cycle,
            interior_vertices,
            interior_interior_edges,
            interior_boundary_edges,
            degrees,
            on_boundary,
            system_index,
            fans,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Faces, consistently oriented.
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// All edges, sorted, each stored as `(lo, hi)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary_cycle(&self) -> &[usize] {
        &self.boundary_cycle
    }

    /// Interior vertices in ascending index order.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    /// `E_I^I`: edges whose endpoints are both interior.
    pub fn interior_interior_edges(&self) -> &[Edge] {
        &self.interior_interior_edges
    }

    /// `E_I^B`: edges stored as `(interior, boundary)`.
    pub fn interior_boundary_edges(&self) -> &[Edge] {
        &self.interior_boundary_edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn n_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary_cycle.len()
    }

    /// `M_I = |E_I^I|`.
    pub fn m_interior(&self) -> usize {
        self.interior_interior_edges.len()
    }

    /// `M_B = |E_I^B|`.
    pub fn m_boundary(&self) -> usize {
        self.interior_boundary_edges.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn is_boundary_edge(&self, a: usize, b: usize) -> bool {
        self.boundary_edges.contains(&edge_key(a, b))
    }

    /// Row of `v` in the linear systems: interior vertices first (ascending),
    /// then boundary vertices in cycle order.
    pub fn system_index(&self, v: usize) -> usize {
        self.system_index[v]
    }

    /// Vertices listed in system-row order.
    pub fn system_order(&self) -> Vec<usize> {
        self.interior_vertices
            .iter()
            .chain(&self.boundary_cycle)
            .copied()
            .collect()
    }

    /// Neighbours of `v` in counterclockwise fan order (with respect to the
    /// face orientation). Boundary fans start at the next vertex along the
    /// boundary cycle and end at the previous one.
    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.fans[v]
    }

    /// Interior edges (shared by two faces) joining two boundary vertices.
    pub fn find_dividing_edges(&self) -> Vec<Edge> {
        self.edges
            .iter()
            .filter(|&&(a, b)| {
                self.on_boundary[a] && self.on_boundary[b] && !self.boundary_edges.contains(&(a, b))
            })
            .copied()
            .collect()
    }

    /// The same triangulation with every face flipped and the boundary cycle
    /// traversed in the opposite direction from the same start vertex.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        for f in &mut out.faces {
            f.swap(1, 2);
        }
        out.boundary_cycle[1..].reverse();
        for (k, &vb) in out.boundary_cycle.iter().enumerate() {
            out.system_index[vb] = out.interior_vertices.len() + k;
        }
        for (v, fan) in out.fans.iter_mut().enumerate() {
            fan.reverse();
            if !out.on_boundary[v] {
                // restore the smallest-neighbour start for interior fans
                let k = argmin(fan);
                fan.rotate_left(k);
            }
        }
        out
    }
}

fn argmin(xs: &[usize]) -> usize {
    xs.iter()
        .enumerate()
        .min_by_key(|(_, &x)| x)
        .map(|(k, _)| k)
        .unwrap_or(0)
}

fn has_directed_edge(f: &[usize; 3], a: usize, b: usize) -> bool {
    (0..3).any(|k| f[k] == a && f[(k + 1) % 3] == b)
}

fn orient_faces(faces: &mut [[usize; 3]], edge_faces: &BTreeMap<Edge, Vec<usize>>) -> Result<(), MeshError> {
    let mut visited = vec![false; faces.len()];
    let mut queue = VecDeque::from([0usize]);
    visited[0] = true;
    let mut reached = 1;
    while let Some(fi) = queue.pop_front() {
        let f = faces[fi];
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            for &gi in &edge_faces[&edge_key(a, b)] {
                if gi == fi {
                    continue;
                }
                // a consistent neighbour traverses the shared edge as b -> a
                let same_direction = has_directed_edge(&faces[gi], a, b);
                if visited[gi] {
                    if same_direction {
                        return Err(MeshError::InconsistentOrientation { face: gi });
                    }
                } else {
                    if same_direction {
                        faces[gi].swap(1, 2);
                    }
                    visited[gi] = true;
                    reached += 1;
                    queue.push_back(gi);
                }
            }
        }
    }
    if reached != faces.len() {
        return Err(not_a_disk("faces form more than one connected component"));
    }
    Ok(())
}

fn trace_boundary(vertex_count: usize, boundary_edges: &BTreeSet<Edge>) -> Result<Vec<usize>, MeshError> {
    if boundary_edges.is_empty() {
        return Err(not_a_disk("no boundary edges (closed surface)"));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); vertex_count];
    for &(a, b) in boundary_edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    if let Some(v) = adj.iter().position(|n| !n.is_empty() && n.len() != 2) {
        return Err(not_a_disk(format!(
            "boundary vertex {v} has {} boundary edges",
            adj[v].len()
        )));
    }
    let start = adj.iter().position(|n| n.len() == 2).expect("non-empty boundary");
    let next = *adj[start].iter().min().unwrap();
    let mut cycle = vec![start];
    let (mut prev, mut cur) = (start, next);
    while cur != start {
        cycle.push(cur);
        let n = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        prev = cur;
        cur = n;
    }
    if cycle.len() != boundary_edges.len() {
        return Err(not_a_disk("boundary consists of more than one cycle"));
    }
    Ok(cycle)
}

fn build_fans(
    vertex_count: usize,
    faces: &[[usize; 3]],
    on_boundary: &[bool],
    degrees: &[usize],
) -> Result<Vec<Vec<usize>>, MeshError> {
    // succ[v] maps a -> b for every face (v, a, b) in rotation
    let mut succ: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); vertex_count];
    for f in faces {
        for k in 0..3 {
            succ[f[k]].insert(f[(k + 1) % 3], f[(k + 2) % 3]);
        }
    }
    let mut fans = Vec::with_capacity(vertex_count);
    for v in 0..vertex_count {
        let s = &succ[v];
        let start = if on_boundary[v] {
            let targets: BTreeSet<usize> = s.values().copied().collect();
            let starts: Vec<usize> = s.keys().filter(|k| !targets.contains(k)).copied().collect();
            if starts.len() != 1 {
                return Err(not_a_disk(format!("boundary vertex {v} is not a manifold vertex")));
            }
            starts[0]
        } else {
            *s.keys().next().expect("vertex in some face")
        };
        let mut fan = vec![start];
        let mut cur = start;
        while let Some(&n) = s.get(&cur) {
            if n == start {
                break;
            }
            fan.push(n);
            cur = n;
            if fan.len() > degrees[v] {
                break;
            }
        }
        if fan.len() != degrees[v] {
            return Err(not_a_disk(format!("the faces around vertex {v} do not form a single fan")));
        }
        fans.push(fan);
    }
    Ok(fans)
}
