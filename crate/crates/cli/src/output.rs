use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use ffem_core::mesh::Family;
use ffem_core::study::FuzzyEigenStudy;

pub const CSV_HEADER: [&str; 8] = [
    "family",
    "level",
    "n_elements",
    "n_nodes",
    "alpha",
    "lambda_lo",
    "lambda_hi",
    "lambda_crisp",
];

/// Plain decimal with ten significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One row per (mesh level, α level), mesh levels ordered by element count.
pub fn study_csv(study: &FuzzyEigenStudy) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for lr in &study.levels {
        for (alpha, cut) in lr.fuzzy.levels().iter().zip(lr.fuzzy.cuts()) {
            w.write_record([
                lr.family.as_str().to_string(),
                lr.level.to_string(),
                lr.n_elements.to_string(),
                lr.n_nodes.to_string(),
                alpha.to_string(),
                fmt_sig(cut.lo()),
                fmt_sig(cut.hi()),
                fmt_sig(lr.crisp),
            ])?;
        }
    }
    w.into_inner().context("flushing csv")
}

#[derive(Serialize)]
pub struct Membership {
    pub family: Family,
    pub level: u32,
    pub n_elements: usize,
    pub crisp: f64,
    /// `(λ, μ)` pairs tracing the membership function.
    pub polyline: Vec<(f64, f64)>,
}

pub fn memberships(study: &FuzzyEigenStudy) -> Vec<Membership> {
    study
        .levels
        .iter()
        .map(|lr| Membership {
            family: lr.family,
            level: lr.level,
            n_elements: lr.n_elements,
            crisp: lr.crisp,
            polyline: lr.fuzzy.to_polyline(),
        })
        .collect()
}

pub fn json<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes to `path` through a temporary file in the same directory, or to
/// standard output.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("creating temporary file in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.persist(path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}
