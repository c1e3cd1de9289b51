use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::RunOptions;

#[derive(Serialize)]
struct Envelope<'a, S: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    workers: usize,
    spec: &'a S,
    result: &'a R,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
}

/// Writes the JSON report to `--out` or stdout; wall time goes to stderr.
pub fn emit<S: Serialize, R: Serialize>(
    command: &str,
    spec: &S,
    result: &R,
    opts: &RunOptions,
    workers: usize,
    elapsed: Duration,
) -> Result<()> {
    let envelope = Envelope {
        tool: "symword",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: opts.seed,
        workers,
        spec,
        result,
        wall_time_seconds: opts.timing.then_some(elapsed.as_secs_f64()),
    };
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    match &opts.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    eprintln!("{command}: {:.3}s", elapsed.as_secs_f64());
    Ok(())
}

/// Writes rows with a header to the `--csv` path, if one was given.
pub fn csv<T: Serialize>(path: Option<&Path>, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
