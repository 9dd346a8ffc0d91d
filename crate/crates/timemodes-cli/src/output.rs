//! Deterministic CSV and JSON output: 17-significant-digit scientific
//! notation, LF line endings, byte-identical across runs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// One float, 17 significant digits, scientific notation.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a CSV table. `path` may be "-" for stdout.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = open_sink(path)?;
    let render = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    };
    render(&mut *out).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    out.flush()
        .map_err(|e| CliError::Io(format!("flushing {}: {e}", path.display())))
}

/// Writes pretty JSON (sorted keys come from serde_json's BTreeMap-backed
/// objects, so output is deterministic). `path` may be "-" for stdout.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let rendered = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serializing JSON: {e}")))?;
    let mut out = open_sink(path)?;
    writeln!(out, "{rendered}")
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn open_sink(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() && !parent.exists() {
                return Err(CliError::Io(format!(
                    "output directory {} does not exist",
                    parent.display()
                )));
            }
        }
        let file = File::create(path)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}
