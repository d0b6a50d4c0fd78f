use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const VERSION: &str = concat!("ladlag ", env!("CARGO_PKG_VERSION"));

/// Provenance stamped on every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn line(&self) -> String {
        format!("# {} config_hash={} seed={}", self.version, self.config_hash, self.seed)
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, stamp: &Stamp, body: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Stamped { stamp, body })?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Comment line with the stamp, then a header row, then one row per record.
pub fn write_csv<T: Serialize>(path: &Path, stamp: &Stamp, rows: &[T]) -> Result<()> {
    let mut file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "{}", stamp.line())?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn eta_file_label(label: &str) -> String {
    format!("trajectories_{label}.csv")
}
