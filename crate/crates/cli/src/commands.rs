use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use starembed::io::{
    embedding_document, parse_embedding, parse_off, parse_problem, to_json, write_embedding, write_problem, FormatError,
    ParsedProblem, WeightsSpec,
};
use starembed::quad::{circle_path, homotopy_path, line_path, QuadError, QuadInstance};
use starembed::star::{
    build_coupling, eye_coupling, limit_point, solve_at_epsilon, spectral_report, CouplingSpec, SpectralReport,
};
use starembed::svg::{render_svg, SvgOptions, Viewport};
use starembed::tutte::{normalize_weights, DEFAULT_TOL};
use starembed::{generate, star_embed, tutte_embed, BoundaryPolygon, EmbedError, Point, StarOptions};

use crate::output::{emit, read, summary, write_atomic, Failure};
use crate::{Cli, Command, Coupling, DiagnoseArgs, EmbedArgs, GenerateArgs, HomotopyArgs, Kind, RenderArgs, Scheme, StarArgs};

/// Result of one instance: the main document plus optional extras.
struct Outcome {
    document: String,
    svg: Option<String>,
    human: String,
    summary: serde_json::Value,
}

fn format_failure(e: FormatError) -> Failure {
    match e {
        FormatError::Domain { .. } => Failure::Domain(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}

fn embed_failure(e: EmbedError) -> Failure {
    match e {
        EmbedError::HalvingExhausted { .. } | EmbedError::SolveFailed(_) => Failure::Invalid(e.to_string()),
        _ => Failure::Domain(e.to_string()),
    }
}

fn quad_failure(e: QuadError) -> Failure {
    match e {
        QuadError::Embed(inner) => embed_failure(inner),
        other => Failure::Domain(other.to_string()),
    }
}

fn load_problem(path: &Path) -> Result<ParsedProblem, Failure> {
    parse_problem(&read(path)?, true).map_err(format_failure)
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::ValidateMesh(a) => dispatch(cli, a.input.as_deref(), a.output.as_deref(), "mesh", None, validate_mesh),
        Command::Embed(a) => dispatch(cli, a.io.input.as_deref(), a.io.output.as_deref(), "embedding", a.svg.as_deref(), |c, p| {
            embed(c, a, p)
        }),
        Command::EmbedStar(a) => dispatch(cli, a.io.input.as_deref(), a.io.output.as_deref(), "embedding", a.svg.as_deref(), |c, p| {
            embed_star(c, a, p)
        }),
        Command::Diagnose(a) => dispatch(cli, a.io.input.as_deref(), a.io.output.as_deref(), "diagnostics", None, |c, p| {
            diagnose(c, a, p)
        }),
        Command::Homotopy(a) => single_only(cli).and_then(|_| homotopy(cli, a)),
        Command::Render(a) => single_only(cli).and_then(|_| render(cli, a)),
        Command::Generate(a) => single_only(cli).and_then(|_| generate_cmd(cli, a)),
    }
}

fn single_only(cli: &Cli) -> Result<(), Failure> {
    match cli.batch {
        Some(_) => Err(Failure::Usage("--batch is not supported by this command".into())),
        None => Ok(()),
    }
}

fn dispatch<F>(
    cli: &Cli,
    input: Option<&Path>,
    output: Option<&Path>,
    suffix: &str,
    svg: Option<&Path>,
    f: F,
) -> Result<(), Failure>
where
    F: Fn(&Cli, &Path) -> Result<Outcome, Failure> + Sync,
{
    let Some(dir) = &cli.batch else {
        let input = input.ok_or_else(|| Failure::Usage("missing input file".into()))?;
        let out = f(cli, input)?;
        // the document is written last so that no file appears on failure
        if let (Some(path), Some(text)) = (svg, &out.svg) {
            write_atomic(path, text)?;
        }
        emit(output, &out.document)?;
        summary(cli, &out.human, out.summary);
        return Ok(());
    };
    if input.is_some() || svg.is_some() {
        return Err(Failure::Usage("--batch takes no input file or --svg".into()));
    }
    let out_dir = output.ok_or_else(|| Failure::Usage("--batch needs --output DIR".into()))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::Usage(format!("creating {}: {e}", out_dir.display())))?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Usage(format!("reading {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|x| x.to_str()), Some("json" | "off")))
        .collect();
    files.sort();
    let results: Vec<(PathBuf, Result<Outcome, Failure>)> = files.par_iter().map(|p| (p.clone(), f(cli, p))).collect();
    let mut worst: Option<Failure> = None;
    let mut failed = 0;
    for (path, r) in results {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
        match r {
            Ok(out) => {
                write_atomic(&out_dir.join(format!("{stem}.{suffix}.json")), &out.document)?;
                summary(cli, &format!("{stem}: {}", out.human), json!({"instance": stem, "summary": out.summary}));
            }
            Err(e) => {
                failed += 1;
                summary(
                    cli,
                    &format!("{stem}: error: {e}"),
                    json!({"instance": stem, "error": e.to_string(), "exit_code": e.code()}),
                );
                if worst.as_ref().is_none_or(|w| e.code() > w.code()) {
                    worst = Some(e);
                }
            }
        }
    }
    match worst {
        None => Ok(()),
        Some(w) => {
            let msg = format!("{failed} of {} instances failed", files.len());
            Err(match w {
                Failure::Usage(_) => Failure::Usage(msg),
                Failure::Domain(_) => Failure::Domain(msg),
                Failure::Invalid(_) => Failure::Invalid(msg),
            })
        }
    }
}

#[derive(Serialize)]
struct MeshReport {
    version: &'static str,
    kind: &'static str,
    valid: bool,
    vertices: usize,
    faces: usize,
    n_interior: usize,
    n_boundary: usize,
    m_interior: usize,
    m_boundary: usize,
    boundary_cycle: Vec<usize>,
    dividing_edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convex: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strictly_star_shaped: Option<bool>,
    warnings: Vec<String>,
}

fn validate_mesh(_: &Cli, input: &Path) -> Result<Outcome, Failure> {
    let text = read(input)?;
    let (t, polygon) = if input.extension().and_then(|x| x.to_str()) == Some("off") {
        let m = parse_off(&text).map_err(format_failure)?;
        (m.triangulation().map_err(format_failure)?, None)
    } else {
        let p = parse_problem(&text, true).map_err(format_failure)?.problem;
        ((**p.triangulation()).clone(), Some(p.polygon().clone()))
    };
    let dividing = t.find_dividing_edges();
    let mut warnings = Vec::new();
    if !dividing.is_empty() {
        warnings.push(format!(
            "dividing edges {:?} prevent the star construction",
            dividing
        ));
    }
    if t.n_interior() == 0 {
        warnings.push("no interior vertices".into());
    }
    let report = MeshReport {
        version: "1",
        kind: "mesh-report",
        valid: true,
        vertices: t.vertex_count(),
        faces: t.faces().len(),
        n_interior: t.n_interior(),
        n_boundary: t.n_boundary(),
        m_interior: t.m_interior(),
        m_boundary: t.m_boundary(),
        boundary_cycle: t.boundary_cycle().to_vec(),
        dividing_edges: dividing,
        convex: polygon.as_ref().map(BoundaryPolygon::is_convex),
        strictly_star_shaped: polygon.as_ref().map(BoundaryPolygon::is_strictly_star_shaped),
        warnings: warnings.clone(),
    };
    let mut human = format!(
        "valid disk: {} vertices ({} interior), {} faces",
        report.vertices, report.n_interior, report.faces
    );
    for w in &warnings {
        human.push_str(&format!("\nwarning: {w}"));
    }
    Ok(Outcome {
        document: to_json(&report),
        svg: None,
        human,
        summary: json!({"valid": true, "warnings": warnings}),
    })
}

fn embed(cli: &Cli, a: &EmbedArgs, input: &Path) -> Result<Outcome, Failure> {
    let parsed = load_problem(input)?;
    let p = &parsed.problem;
    if !p.polygon().is_convex() {
        let reflex: Vec<usize> = p
            .polygon()
            .reflex_vertices()
            .iter()
            .map(|&k| p.triangulation().boundary_cycle()[k])
            .collect();
        return Err(Failure::Domain(format!(
            "boundary is not convex (reflex vertices {reflex:?}); use `starembed embed-star` for star-shaped boundaries"
        )));
    }
    let spec = match a.scheme {
        None => parsed.weights.clone().unwrap_or(WeightsSpec::Uniform),
        Some(Scheme::Uniform) => WeightsSpec::Uniform,
        Some(Scheme::Random) => WeightsSpec::Random { seed: a.seed },
        Some(Scheme::File) => {
            let path = a
                .weights
                .as_ref()
                .ok_or_else(|| Failure::Usage("--scheme file needs --weights FILE".into()))?;
            let entries: Vec<(usize, usize, f64)> = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            WeightsSpec::Explicit(entries)
        }
    };
    let t = p.triangulation();
    let raw = spec.raw(t).map_err(embed_failure)?;
    let w = normalize_weights(t, &raw).map_err(embed_failure)?;
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let out = tutte_embed(p, &w, tol).map_err(embed_failure)?;
    if !out.report.valid {
        return Err(Failure::Invalid("Tutte solution failed validation".into()));
    }
    let residual = out.embedding.info.residual.unwrap_or(0.0);
    Ok(Outcome {
        document: write_embedding(&out.embedding, Some(&out.report)),
        svg: a.svg.as_ref().map(|_| render_svg(&out.embedding, &SvgOptions::default())),
        human: format!(
            "Tutte embedding of {} interior vertices, residual {residual:.2e}, valid",
            t.n_interior()
        ),
        summary: json!({"method": "tutte", "residual": residual, "valid": true}),
    })
}

fn embed_star(_: &Cli, a: &StarArgs, input: &Path) -> Result<Outcome, Failure> {
    let parsed = load_problem(input)?;
    let p = &parsed.problem;
    let opts = StarOptions {
        eps0: a.eps0,
        max_halvings: a.max_halvings,
        eye: a.eye.map(|(x, y)| Point::new(x, y)).or(parsed.eye),
    };
    let out = star_embed(p, &opts).map_err(embed_failure)?;
    let info = &out.embedding.info;
    let (eps, halvings) = (info.epsilon.unwrap_or(f64::NAN), info.halvings.unwrap_or(0));
    let kernel = Some(p.polygon().kernel().vertices);
    Ok(Outcome {
        document: write_embedding(&out.embedding, Some(&out.report)),
        svg: a.svg.as_ref().map(|_| render_svg(&out.embedding, &SvgOptions { kernel, viewport: None })),
        human: format!("valid embedding at epsilon {eps:e} after {halvings} halvings"),
        summary: json!({"method": "epsilon", "epsilon": eps, "halvings": halvings, "valid": true}),
    })
}

#[derive(Serialize)]
struct DiagnoseRow {
    #[serde(flatten)]
    spectral: SpectralReport,
    /// Largest interior distance to the limit point.
    limit_distance: f64,
}

#[derive(Serialize)]
struct DiagnoseDocument {
    version: &'static str,
    kind: &'static str,
    coupling: &'static str,
    n_interior: usize,
    limit_point: [f64; 2],
    rows: Vec<DiagnoseRow>,
}

fn diagnose(_: &Cli, a: &DiagnoseArgs, input: &Path) -> Result<Outcome, Failure> {
    let parsed = load_problem(input)?;
    let p = &parsed.problem;
    let t = p.triangulation();
    if t.n_interior() > a.budget {
        return Err(embed_failure(EmbedError::BudgetExceeded {
            n: t.n_interior(),
            budget: a.budget,
        }));
    }
    let (w, v0, name) = match a.coupling {
        Coupling::Uniform => {
            let w = build_coupling(t, CouplingSpec::Uniform).map_err(embed_failure)?;
            let v0 = limit_point(t, p.polygon(), CouplingSpec::Uniform).map_err(embed_failure)?;
            (w, v0, "uniform")
        }
        Coupling::Eye => {
            let (c, w) = eye_coupling(p, parsed.eye).map_err(embed_failure)?;
            (w, c.eye, "eye")
        }
    };
    let mut rows = Vec::new();
    for &eps in &a.eps_sweep {
        let spectral = spectral_report(t, &w, eps, a.budget).map_err(embed_failure)?;
        let e = solve_at_epsilon(p, &w, eps).map_err(embed_failure)?;
        let limit_distance = e
            .interior_positions()
            .iter()
            .map(|q| (q - v0).norm())
            .fold(0.0, f64::max);
        rows.push(DiagnoseRow {
            spectral,
            limit_distance,
        });
    }
    let mut human = format!(
        "limit point ({:.6}, {:.6}), N_I = {}\n{:>10}  {:>12}  {:>12}  {:>12}  {:>12}",
        v0.x,
        v0.y,
        t.n_interior(),
        "epsilon",
        "lmin/eps",
        "|eS^-1 - 1|",
        "vec dev",
        "dist to v0"
    );
    for r in &rows {
        let s = &r.spectral;
        human.push_str(&format!(
            "\n{:>10.1e}  {:>12.6e}  {:>12.6e}  {:>12.6e}  {:>12.6e}",
            s.epsilon, s.lambda_min_over_eps, s.inverse_deviation, s.eigenvector_deviation, r.limit_distance
        ));
    }
    let doc = DiagnoseDocument {
        version: "1",
        kind: "diagnostics",
        coupling: name,
        n_interior: t.n_interior(),
        limit_point: [v0.x, v0.y],
        rows,
    };
    Ok(Outcome {
        document: to_json(&doc),
        svg: None,
        human,
        summary: json!({"rows": doc.rows.len(), "limit_point": doc.limit_point}),
    })
}

fn homotopy(cli: &Cli, a: &HomotopyArgs) -> Result<(), Failure> {
    let parsed = load_problem(&a.input)?;
    let q = QuadInstance::new(parsed.problem).map_err(quad_failure)?;
    let path: Vec<Point> = if let Some(file) = &a.path {
        let pts: Vec<[f64; 2]> =
            serde_json::from_str(&read(file)?).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
        pts.into_iter().map(|[x, y]| Point::new(x, y)).collect()
    } else if let Some(r) = a.circle {
        circle_path(q.v0(), r, a.frames)
    } else if let Some((x, y)) = a.line {
        line_path(q.v0(), Point::new(x, y), a.frames)
    } else {
        line_path(q.v0(), q.hull_centroid(), a.frames)
    };
    if path.is_empty() {
        return Err(Failure::Usage("empty path".into()));
    }
    let base = q.base_embedding().map_err(quad_failure)?;
    let h = homotopy_path(&q, &base, &path).map_err(quad_failure)?;
    if let Some(k) = h.first_invalid() {
        return Err(Failure::Invalid(format!("frame {k} failed validation")));
    }
    let viewport = Viewport::fit(h.samples.iter().flat_map(|s| s.embedding.coords()));
    std::fs::create_dir_all(&a.out).map_err(|e| Failure::Usage(format!("creating {}: {e}", a.out.display())))?;
    let mut docs = Vec::with_capacity(h.samples.len());
    for (k, s) in h.samples.iter().enumerate() {
        write_atomic(&a.out.join(format!("frame_{k:04}.json")), &write_embedding(&s.embedding, Some(&s.report)))?;
        let svg = render_svg(
            &s.embedding,
            &SvgOptions {
                kernel: None,
                viewport: Some(viewport),
            },
        );
        write_atomic(&a.out.join(format!("frame_{k:04}.svg")), &svg)?;
        docs.push(embedding_document(&s.embedding, Some(&s.report)));
    }
    write_atomic(&a.out.join("path.json"), &to_json(&docs))?;
    let resid = h.samples.iter().map(|s| s.correspondence_residual).fold(0.0, f64::max);
    summary(
        cli,
        &format!(
            "{} valid frames, max step displacement {:.3e}, max correspondence residual {resid:.2e}",
            h.samples.len(),
            h.max_step_displacement
        ),
        json!({"frames": h.samples.len(), "max_step_displacement": h.max_step_displacement, "residual": resid}),
    );
    Ok(())
}

fn render(cli: &Cli, a: &RenderArgs) -> Result<(), Failure> {
    let (e, _) = parse_embedding(&read(&a.input)?).map_err(format_failure)?;
    let kernel = if a.kernel {
        let poly = BoundaryPolygon::new(e.boundary_positions()).map_err(|err| Failure::Domain(err.to_string()))?;
        Some(poly.kernel().vertices)
    } else {
        None
    };
    let svg = render_svg(&e, &SvgOptions { kernel, viewport: None });
    emit(a.output.as_deref(), &svg)?;
    summary(cli, "rendered", json!({"rendered": true}));
    Ok(())
}

fn generate_cmd(cli: &Cli, a: &GenerateArgs) -> Result<(), Failure> {
    let p = match a.kind {
        Kind::Convex => generate::convex_instance(a.seed, a.max_boundary, a.max_interior),
        Kind::Star => generate::star_instance(a.seed, a.max_boundary, a.max_interior),
        Kind::Quad => generate::quad_instance(a.seed, a.max_interior),
    };
    let weights = a.random_weights.then_some(WeightsSpec::Random { seed: a.seed });
    emit(a.output.as_deref(), &write_problem(&p, weights.as_ref(), None))?;
    let t = p.triangulation();
    summary(
        cli,
        &format!("{} boundary and {} interior vertices", t.n_boundary(), t.n_interior()),
        json!({"n_boundary": t.n_boundary(), "n_interior": t.n_interior()}),
    );
    Ok(())
}
