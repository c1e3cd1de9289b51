use std::fs;

use anyhow::{bail, ensure, Context, Result};
use symword::eval::exact_distribution;
use symword::{Distribution, Permutation, Word};

/// Parses a measure description at degree `n`.
pub fn parse(spec: &str, n: usize, r: usize) -> Result<Distribution> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let dist = match kind.trim() {
        "uniform" => Distribution::uniform(n)?,
        "ncycles" => Distribution::ncycles(n)?,
        "class" => Distribution::class_uniform(&Permutation::parse(arg, n)?)?,
        "delta" => Distribution::delta(Permutation::parse(arg, n)?),
        "word" => exact_distribution(&Word::parse(arg, n, r)?)?,
        "file" => {
            let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
            let dist: Distribution = serde_json::from_str(&text)
                .with_context(|| format!("parsing distribution in {arg}"))?;
            ensure!(
                dist.degree() == n,
                "{arg} has degree {}, expected {n}",
                dist.degree()
            );
            dist
        }
        other => bail!(
            "unknown measure {other:?}; expected uniform, ncycles, class:<cycles>, delta:<cycles>, \
             word:<text> or file:<path>"
        ),
    };
    Ok(dist)
}
