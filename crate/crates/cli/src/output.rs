use std::fmt;
use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::Cli;

/// A failed command with its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, unreadable input or unwritable output.
    Usage(String),
    /// The input is invalid for the requested operation.
    Domain(String),
    /// Computation finished without a valid embedding.
    Invalid(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Domain(_) => 2,
            Failure::Invalid(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Invalid(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

pub fn report_failure(cli: &Cli, f: &Failure) {
    if cli.json {
        eprintln!("{}", json!({"error": f.message(), "exit_code": f.code()}));
    } else {
        eprintln!("error: {f}");
    }
}

/// Human or JSON summary on stderr.
pub fn summary(cli: &Cli, human: &str, value: serde_json::Value) {
    if cli.quiet {
        return;
    }
    if cli.json {
        eprintln!("{value}");
    } else {
        eprintln!("{human}");
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Failure::Usage(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Usage(format!("writing stdout: {e}")))
        }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))
}
