//! SVG rendering of embeddings.

use std::fmt::Write;

use crate::embedding::Embedding;
use crate::polygon::Point;
use crate::validate::{check_orientations, default_area_tolerance, FaceStatus};

pub const CANVAS: f64 = 800.0;
pub const MARGIN: f64 = 0.05;

/// Affine map from world coordinates to the canvas, y pointing up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    min: Point,
    scale: f64,
    offset: (f64, f64),
}

impl Viewport {
    /// Fits the bounding box of `points` into the canvas minus margins,
    /// centred and with equal scale on both axes.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.x.is_finite() {
            lo = Point::origin();
            hi = Point::new(1.0, 1.0);
        }
        let inner = CANVAS * (1.0 - 2.0 * MARGIN);
        let span = (hi.x - lo.x).max(hi.y - lo.y);
        let scale = if span > 0.0 { inner / span } else { 1.0 };
        let offset = (
            CANVAS * MARGIN + 0.5 * (inner - scale * (hi.x - lo.x)),
            CANVAS * MARGIN + 0.5 * (inner - scale * (hi.y - lo.y)),
        );
        Self { min: lo, scale, offset }
    }

    pub fn map(&self, p: &Point) -> (f64, f64) {
        let x = self.offset.0 + self.scale * (p.x - self.min.x);
        let y = self.offset.1 + self.scale * (p.y - self.min.y);
        (x, CANVAS - y)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SvgOptions {
    /// Region drawn shaded beneath the mesh, e.g. a kernel.
    pub kernel: Option<Vec<Point>>,
    /// Shared viewport; fitted to the embedding (and kernel) when absent.
    pub viewport: Option<Viewport>,
}

fn points_attr(vp: &Viewport, pts: &[Point]) -> String {
    pts.iter()
        .map(|p| {
            let (x, y) = vp.map(p);
            format!("{x:.3},{y:.3}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_svg(e: &Embedding, opts: &SvgOptions) -> String {
    let vp = opts.viewport.unwrap_or_else(|| {
        Viewport::fit(e.coords().iter().chain(opts.kernel.iter().flatten()))
    });
    let t = e.triangulation();
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    if let Some(k) = &opts.kernel {
        if k.len() >= 3 {
            let _ = writeln!(
                s,
                r##"<polygon class="kernel" points="{}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##,
                points_attr(&vp, k)
            );
        }
    }
    for (f, v) in t
        .faces()
        .iter()
        .zip(check_orientations(e, default_area_tolerance(e)))
    {
        if v.status == FaceStatus::Inverted {
            let pts: Vec<Point> = f.iter().map(|&i| e.position(i)).collect();
            let _ = writeln!(
                s,
                r##"<polygon class="inverted" points="{}" fill="#ef3b2c" fill-opacity="0.6" stroke="none"/>"##,
                points_attr(&vp, &pts)
            );
        }
    }
    for &(a, b) in t.edges() {
        let (x1, y1) = vp.map(&e.position(a));
        let (x2, y2) = vp.map(&e.position(b));
        let width = if t.is_boundary_edge(a, b) { 2.0 } else { 1.0 };
        let _ = writeln!(
            s,
            r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#252525" stroke-width="{width}"/>"##
        );
    }
    for (v, p) in e.coords().iter().enumerate() {
        let (x, y) = vp.map(p);
        let fill = if t.is_boundary(v) { "#252525" } else { "#3182bd" };
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{fill}"/>"#);
    }
    s.push_str("</svg>\n");
    s
}
