//! Artifact emission: fixed-width CSV and pretty JSON, both carrying the
//! tool version, config hash, and seed, written atomically.

use crate::params::RunConfig;
use crate::CliError;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::PathBuf;

/// One CSV cell: a number rendered at the configured precision, or a marker.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Num(f64),
    /// requested point lies outside the achievable region
    Infeasible,
    /// textual tag such as a scheme name
    Label(&'static str),
}

impl Cell {
    pub fn from_exponent(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Infeasible
        }
    }

    fn render(self, precision: usize) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.precision$}"),
            Cell::Num(_) | Cell::Infeasible => "inf".to_string(),
            Cell::Label(s) => s.to_string(),
        }
    }
}

pub fn write_csv(
    cfg: &RunConfig,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> Result<PathBuf, CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "# tool_version={}", crate::VERSION);
    let _ = writeln!(text, "# config_hash={}", cfg.config_hash());
    let _ = writeln!(text, "# seed={}", cfg.seed);
    let _ = writeln!(text, "{}", header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.render(cfg.precision)).collect();
        let _ = writeln!(text, "{}", cells.join(","));
    }
    write_atomic(cfg, text.as_bytes())
}

pub fn write_json(cfg: &RunConfig, body: Value) -> Result<PathBuf, CliError> {
    let doc = serde_json::json!({
        "tool_version": crate::VERSION,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "command": cfg.command,
        "params": Value::Object(cfg.params.clone()),
        "report": body,
    });
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Io(format!("serialize: {e}")))?;
    text.push('\n');
    write_atomic(cfg, text.as_bytes())
}

/// Write to a temp file in the destination directory, then rename, so a
/// failed run never leaves a partial artifact behind.
fn write_atomic(cfg: &RunConfig, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let dir = cfg
        .out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::Io(format!("temp file in {}: {e}", dir.display())))?;
    std::io::Write::write_all(&mut tmp, bytes)
        .map_err(|e| CliError::Io(format!("write: {e}")))?;
    tmp.persist(&cfg.out)
        .map_err(|e| CliError::Io(format!("rename to {}: {e}", cfg.out.display())))?;
    Ok(cfg.out.clone())
}
