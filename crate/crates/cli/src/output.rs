use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use qecmet_core::code::{CodePair, QecReport};
use qecmet_core::io::{matrix_to_rows, vector_to_pairs};
use qecmet_core::operators::ComplexMatrix;

/// Output directory for relative output paths, when set.
pub const OUT_ENV: &str = "QECMET_OUT";

/// Joins relative output paths onto `$QECMET_OUT` and creates the parent
/// directory.
pub fn resolve_output(path: &Path) -> Result<PathBuf> {
    let path = match std::env::var_os(OUT_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(path)
}

/// Writes to the resolved file, or to stdout when no path is given.
pub fn write_text(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => {
            let path = resolve_output(p)?;
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => to_stdout(text)?,
    }
    Ok(())
}

/// Pretty JSON on stdout.
pub fn emit(value: &Value) -> Result<()> {
    to_stdout(&(serde_json::to_string_pretty(value)? + "\n"))
}

/// A closed pipe (`qecmet ... | head`) is not an error.
fn to_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    json!(matrix_to_rows(m))
}

pub fn qec_json(r: &QecReport) -> Value {
    json!({
        "residual_1": r.residual_1,
        "residual_2": r.residual_2,
        "gap_3": r.gap_3,
        "passes": r.passes,
        "holds": r.holds(),
        "tol": r.tol,
        "lambda": r.lambda.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    })
}

pub fn code_summary(code: &CodePair, path: &Path) -> Value {
    json!({
        "path": path.display().to_string(),
        "d_P": code.probe_dim(),
        "d_A": code.ancilla_dim(),
        "c0": vector_to_pairs(code.c0().amplitudes()),
        "c1": vector_to_pairs(code.c1().amplitudes()),
    })
}

/// Rounds to nine decimals so converged values print as `2`, not
/// `2.0000000000000036`.
pub fn fmt_num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    format!("{}", if r == 0.0 { 0.0 } else { r })
}
