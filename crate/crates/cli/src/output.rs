//! Result files: CSV or JSON rows, plus a `.meta.json` sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct Meta<'a, C: Serialize> {
    version: &'a str,
    command: &'a str,
    seed: Option<u64>,
    config_sha256: String,
    config: &'a C,
}

pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    let text = serde_json::to_string(config)?;
    Ok(Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn render<R: Serialize>(rows: &[R], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            Ok(w.into_inner().context("flushing csv")?)
        }
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the rows to `out` (or stdout) and, for files, the metadata sidecar.
pub fn emit<R: Serialize, C: Serialize>(
    rows: &[R],
    format: Format,
    out: Option<&Path>,
    command: &str,
    seed: Option<u64>,
    config: &C,
) -> Result<()> {
    let body = render(rows, format)?;
    match out {
        None => std::io::stdout().write_all(&body)?,
        Some(path) => {
            fs::write(path, &body).with_context(|| format!("writing {}", path.display()))?;
            let meta = Meta {
                version: env!("CARGO_PKG_VERSION"),
                command,
                seed,
                config_sha256: config_hash(config)?,
                config,
            };
            let mut text = serde_json::to_vec_pretty(&meta)?;
            text.push(b'\n');
            let side = sidecar(path);
            fs::write(&side, text).with_context(|| format!("writing {}", side.display()))?;
        }
    }
    Ok(())
}
