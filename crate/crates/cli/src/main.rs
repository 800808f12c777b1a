//! `starembed`: embed triangulated disks from the command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 invalid input for the
//! requested operation, 3 no valid embedding produced.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Debug, Parser)]
#[command(name = "starembed", version, about = "Straight-line embeddings of triangulated disks")]
pub struct Cli {
    /// Relative residual tolerance for Tutte solves.
    #[arg(long, global = true, env = "STAREMBED_TOL")]
    pub tol: Option<f64>,
    /// Suppress the human-readable summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print summaries and errors as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Process every `*.json` (or `*.off`) file in a directory; `--output`
    /// must then name a directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub batch: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a problem's triangulation is a disk and list dividing edges.
    ValidateMesh(IoArgs),
    /// Tutte embedding for a convex boundary.
    Embed(EmbedArgs),
    /// ε-halving embedding for a strictly star-shaped boundary.
    EmbedStar(StarArgs),
    /// Spectral diagnostics of S(ε) over a sweep of ε.
    Diagnose(DiagnoseArgs),
    /// Sections of a reflex quadrilateral along a path of the reflex vertex.
    Homotopy(HomotopyArgs),
    /// Render an embedding document as SVG.
    Render(RenderArgs),
    /// Write a seeded random problem document.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Input document (omit with --batch).
    pub input: Option<PathBuf>,
    /// Output file (stdout when absent), or directory with --batch.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Uniform,
    File,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Weight scheme; defaults to the document's weights, else uniform.
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// Seed for random weights.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON list `[[i, j, c], ...]` of directed weights for `--scheme file`.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Also write an SVG rendering.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StarArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = starembed::star::DEFAULT_EPS0)]
    pub eps0: f64,
    #[arg(long, default_value_t = starembed::star::DEFAULT_MAX_HALVINGS)]
    pub max_halvings: u32,
    /// Eye `x,y` in the open kernel; defaults to the document's eye, else
    /// the kernel centroid.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub eye: Option<(f64, f64)>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coupling {
    Uniform,
    Eye,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")]
    pub eps_sweep: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Coupling::Uniform)]
    pub coupling: Coupling,
    /// Largest interior vertex count for the dense eigensolver.
    #[arg(long, default_value_t = starembed::star::DEFAULT_EIGEN_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Clone, Args)]
pub struct HomotopyArgs {
    /// Problem document of a quadrilateral with one reflex vertex.
    pub input: PathBuf,
    /// JSON list `[[x, y], ...]` of reflex-vertex positions.
    #[arg(long, group = "shape")]
    pub path: Option<PathBuf>,
    /// Circle of this radius around the reflex vertex.
    #[arg(long, group = "shape")]
    pub circle: Option<f64>,
    /// Straight line from the reflex vertex to `x,y`.
    #[arg(long, group = "shape", value_parser = parse_point, allow_hyphen_values = true)]
    pub line: Option<(f64, f64)>,
    /// Number of samples for --circle and --line (default path: a line to
    /// the hull centroid).
    #[arg(long, default_value_t = 20)]
    pub frames: usize,
    /// Directory for frame documents, SVGs and `path.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Embedding document.
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Overlay the kernel of the boundary polygon.
    #[arg(long)]
    pub kernel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Convex,
    Star,
    Quad,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub max_boundary: usize,
    #[arg(long, default_value_t = 30)]
    pub max_interior: usize,
    /// Record seeded random weights in the document.
    #[arg(long)]
    pub random_weights: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let x: f64 = x.trim().parse().map_err(|e| format!("{e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() && y.is_finite() {
        Ok((x, y))
    } else {
        Err("coordinates must be finite".into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            output::report_failure(&cli, &f);
            ExitCode::from(Failure::code(&f))
        }
    }
}
