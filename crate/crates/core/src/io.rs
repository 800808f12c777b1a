//! JSON documents for problems and embeddings, plus read-only OFF import.
//!
//! Problem documents:
//!
//! ```json
//! { "version": "1", "vertices": 6,
//!   "faces": [[0, 1, 4], ...],
//!   "boundary": [{"v": 0, "x": -1.0, "y": -1.0}, ...],
//!   "weights": {"scheme": "random", "seed": 7},
//!   "eye": [0.0, 0.0] }
//! ```
//!
//! `weights` may also be an explicit list `[[i, j, c], ...]` of directed
//! edge weights. Floats are written as the shortest decimal that parses
//! back to the same bits.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::embedding::{Embedding, SolverInfo};
use crate::error::EmbedError;
use crate::mesh::{MeshError, Triangulation};
use crate::polygon::Point;
use crate::problem::{Problem, ProblemError};
use crate::tutte::RawWeights;
use crate::validate::ValidityReport;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{location}: {message}")]
    Domain { location: String, message: String },
}

fn domain(location: impl Into<String>, message: impl ToString) -> FormatError {
    FormatError::Domain {
        location: location.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub v: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsDoc {
    Scheme {
        scheme: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Explicit(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub version: String,
    pub vertices: usize,
    pub faces: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eye: Option<[f64; 2]>,
    /// Initial interior coordinates; carried along but unused by the solvers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<Vec<BoundaryEntry>>,
}

const PROBLEM_KEYS: &[&str] = &["version", "vertices", "faces", "boundary", "weights", "eye", "interior"];
const ENTRY_KEYS: &[&str] = &["v", "x", "y"];
const SCHEME_KEYS: &[&str] = &["scheme", "seed"];

/// Weight choice carried by a problem document.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightsSpec {
    Uniform,
    Random { seed: u64 },
    Explicit(Vec<(usize, usize, f64)>),
}

impl WeightsSpec {
    pub fn raw(&self, t: &Triangulation) -> Result<RawWeights, EmbedError> {
        match self {
            WeightsSpec::Uniform => Ok(RawWeights::uniform(t)),
            WeightsSpec::Random { seed } => Ok(RawWeights::random(t, *seed)),
            WeightsSpec::Explicit(e) => RawWeights::from_directed(t, e),
        }
    }

    fn to_doc(&self) -> WeightsDoc {
        match self {
            WeightsSpec::Uniform => WeightsDoc::Scheme {
                scheme: "uniform".into(),
                seed: None,
            },
            WeightsSpec::Random { seed } => WeightsDoc::Scheme {
                scheme: "random".into(),
                seed: Some(*seed),
            },
            WeightsSpec::Explicit(e) => WeightsDoc::Explicit(e.clone()),
        }
    }
}

/// A parsed, validated problem document.
#[derive(Debug, Clone)]
pub struct ParsedProblem {
    pub problem: Problem,
    pub weights: Option<WeightsSpec>,
    pub eye: Option<Point>,
    pub interior: Option<Vec<(usize, Point)>>,
}

fn check_keys(v: &Value, allowed: &[&str], location: &str) -> Result<(), FormatError> {
    if let Value::Object(map) = v {
        for k in map.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(FormatError::Schema(format!("unknown field `{k}` in {location}")));
            }
        }
    }
    Ok(())
}

fn check_strict(v: &Value) -> Result<(), FormatError> {
    check_keys(v, PROBLEM_KEYS, "document")?;
    for key in ["boundary", "interior"] {
        if let Some(Value::Array(items)) = v.get(key) {
            for (k, item) in items.iter().enumerate() {
                check_keys(item, ENTRY_KEYS, &format!("{key}[{k}]"))?;
            }
        }
    }
    if let Some(w @ Value::Object(_)) = v.get("weights") {
        check_keys(w, SCHEME_KEYS, "weights")?;
    }
    Ok(())
}

fn finite(p: Point, location: String) -> Result<Point, FormatError> {
    if p.x.is_finite() && p.y.is_finite() {
        Ok(p)
    } else {
        Err(domain(location, "coordinate is not finite"))
    }
}

fn mesh_location(e: &MeshError) -> String {
    match e {
        MeshError::IndexOutOfRange { face, .. } | MeshError::InconsistentOrientation { face } => {
            format!("faces[{face}]")
        }
        MeshError::DuplicateFace { face, .. } => format!("faces[{face}]"),
        _ => "faces".into(),
    }
}

/// Parses and validates a problem document. In strict mode unknown fields
/// are rejected.
pub fn parse_problem(text: &str, strict: bool) -> Result<ParsedProblem, FormatError> {
    let value: Value = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    if strict {
        check_strict(&value)?;
    }
    let doc: ProblemDocument = serde_json::from_value(value).map_err(|e| FormatError::Schema(e.to_string()))?;
    problem_from_document(doc)
}

pub fn problem_from_document(doc: ProblemDocument) -> Result<ParsedProblem, FormatError> {
    if doc.version != FORMAT_VERSION {
        return Err(FormatError::Schema(format!("unsupported version `{}`", doc.version)));
    }
    let t = Triangulation::new(doc.vertices, &doc.faces).map_err(|e| domain(mesh_location(&e), &e))?;
    let boundary = doc
        .boundary
        .iter()
        .enumerate()
        .map(|(k, b)| Ok((b.v, finite(Point::new(b.x, b.y), format!("boundary[{k}]"))?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    let problem = Problem::new(t, &boundary).map_err(|e| {
        let loc = match &e {
            ProblemError::Mesh(m) => mesh_location(m),
            ProblemError::NotBoundaryVertex(v)
            | ProblemError::DuplicateCoordinate(v)
            | ProblemError::MissingBoundaryCoordinate(v) => doc
                .boundary
                .iter()
                .position(|b| b.v == *v)
                .map_or_else(|| "boundary".to_string(), |k| format!("boundary[{k}]")),
            _ => "boundary".into(),
        };
        domain(loc, &e)
    })?;
    let weights = match doc.weights {
        None => None,
        Some(WeightsDoc::Explicit(e)) => Some(WeightsSpec::Explicit(e)),
        Some(WeightsDoc::Scheme { scheme, seed }) => Some(match (scheme.as_str(), seed) {
            ("uniform", _) => WeightsSpec::Uniform,
            ("random", Some(seed)) => WeightsSpec::Random { seed },
            ("random", None) => return Err(FormatError::Schema("random weights need a seed".into())),
            (other, _) => return Err(FormatError::Schema(format!("unknown weight scheme `{other}`"))),
        }),
    };
    if let Some(w) = &weights {
        w.raw(problem.triangulation()).map_err(|e| domain("weights", &e))?;
    }
    let eye = doc
        .eye
        .map(|[x, y]| finite(Point::new(x, y), "eye".into()))
        .transpose()?;
    let interior = doc
        .interior
        .map(|items| {
            items
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    let loc = format!("interior[{k}]");
                    if b.v >= problem.triangulation().vertex_count() || problem.triangulation().is_boundary(b.v) {
                        return Err(domain(loc, format!("vertex {} is not interior", b.v)));
                    }
                    Ok((b.v, finite(Point::new(b.x, b.y), loc)?))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    Ok(ParsedProblem {
        problem,
        weights,
        eye,
        interior,
    })
}

pub fn problem_document(problem: &Problem, weights: Option<&WeightsSpec>, eye: Option<Point>) -> ProblemDocument {
    let t = problem.triangulation();
    ProblemDocument {
        version: FORMAT_VERSION.into(),
        vertices: t.vertex_count(),
        faces: t.faces().to_vec(),
        boundary: problem
            .boundary_coordinates()
            .into_iter()
            .map(|(v, p)| BoundaryEntry { v, x: p.x, y: p.y })
            .collect(),
        weights: weights.map(WeightsSpec::to_doc),
        eye: eye.map(|p| [p.x, p.y]),
        interior: None,
    }
}

pub fn write_problem(problem: &Problem, weights: Option<&WeightsSpec>, eye: Option<Point>) -> String {
    to_json(&problem_document(problem, weights, eye))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDocument {
    pub version: String,
    pub kind: String,
    pub vertices: usize,
    pub faces: Vec<[usize; 3]>,
    pub boundary_cycle: Vec<usize>,
    pub coordinates: Vec<[f64; 2]>,
    pub metadata: SolverInfo,
    #[serde(default)]
    pub report: Option<ValidityReport>,
}

pub fn embedding_document(e: &Embedding, report: Option<&ValidityReport>) -> EmbeddingDocument {
    let t = e.triangulation();
    EmbeddingDocument {
        version: FORMAT_VERSION.into(),
        kind: "embedding".into(),
        vertices: t.vertex_count(),
        faces: t.faces().to_vec(),
        boundary_cycle: t.boundary_cycle().to_vec(),
        coordinates: e.coords().iter().map(|p| [p.x, p.y]).collect(),
        metadata: e.info.clone(),
        report: report.cloned(),
    }
}

pub fn write_embedding(e: &Embedding, report: Option<&ValidityReport>) -> String {
    to_json(&embedding_document(e, report))
}

/// Parses an embedding document back into an [`Embedding`] and its report.
pub fn parse_embedding(text: &str) -> Result<(Embedding, Option<ValidityReport>), FormatError> {
    let value: Value = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    let doc: EmbeddingDocument = serde_json::from_value(value).map_err(|e| FormatError::Schema(e.to_string()))?;
    if doc.version != FORMAT_VERSION || doc.kind != "embedding" {
        return Err(FormatError::Schema(format!(
            "expected an embedding document of version {FORMAT_VERSION}"
        )));
    }
    let t = Triangulation::new(doc.vertices, &doc.faces).map_err(|e| domain(mesh_location(&e), &e))?;
    if doc.coordinates.len() != doc.vertices {
        return Err(domain(
            "coordinates",
            format!("{} coordinates for {} vertices", doc.coordinates.len(), doc.vertices),
        ));
    }
    if t.boundary_cycle() != doc.boundary_cycle.as_slice() && t.reversed().boundary_cycle() != doc.boundary_cycle.as_slice() {
        return Err(domain("boundary_cycle", "does not match the faces"));
    }
    let t = if t.boundary_cycle() == doc.boundary_cycle.as_slice() {
        t
    } else {
        t.reversed()
    };
    let coords = doc
        .coordinates
        .iter()
        .enumerate()
        .map(|(k, &[x, y])| finite(Point::new(x, y), format!("coordinates[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Embedding::new(Arc::new(t), coords, doc.metadata), doc.report))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

/// Vertex positions and faces from an OFF file.
#[derive(Debug, Clone, PartialEq)]
pub struct OffMesh {
    pub positions: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
}

impl OffMesh {
    pub fn triangulation(&self) -> Result<Triangulation, FormatError> {
        Triangulation::new(self.positions.len(), &self.faces).map_err(|e| domain(mesh_location(&e), &e))
    }
}

/// Reads a triangle-only OFF file; `z` coordinates are dropped.
pub fn parse_off(text: &str) -> Result<OffMesh, FormatError> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("OFF") {
        return Err(FormatError::Parse("missing OFF header".into()));
    }
    let mut next_num = |what: &str| -> Result<f64, FormatError> {
        tokens
            .next()
            .ok_or_else(|| FormatError::Parse(format!("unexpected end of file reading {what}")))?
            .parse::<f64>()
            .map_err(|e| FormatError::Parse(format!("{what}: {e}")))
    };
    let count = |x: f64, what: &str| -> Result<usize, FormatError> {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(FormatError::Parse(format!("{what} must be a non-negative integer")))
        }
    };
    let nv = count(next_num("vertex count")?, "vertex count")?;
    let nf = count(next_num("face count")?, "face count")?;
    next_num("edge count")?;
    let mut positions = Vec::with_capacity(nv);
    for k in 0..nv {
        let loc = format!("vertex {k}");
        let (x, y, _) = (next_num(&loc)?, next_num(&loc)?, next_num(&loc)?);
        positions.push(Point::new(x, y));
    }
    let mut faces = Vec::with_capacity(nf);
    for k in 0..nf {
        let loc = format!("face {k}");
        let n = count(next_num(&loc)?, &loc)?;
        if n != 3 {
            return Err(domain(format!("faces[{k}]"), format!("{n}-gon; only triangles are supported")));
        }
        let mut f = [0; 3];
        for slot in &mut f {
            *slot = count(next_num(&loc)?, &loc)?;
        }
        faces.push(f);
    }
    Ok(OffMesh { positions, faces })
}
