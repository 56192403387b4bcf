use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::channel::RNG_ALGORITHM;
use crate::error::{Error, Result};

/// Companion file written next to every CSV.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub crate_version: &'static str,
    pub rng: &'static str,
    pub master_seed: u64,
    pub workers: usize,
    /// The experiment file as parsed, re-serialized.
    pub config: String,
    pub extra: serde_json::Value,
}

impl RunMetadata {
    pub fn new(command: &str, master_seed: u64, workers: usize, config: String) -> Self {
        Self {
            command: command.to_string(),
            crate_version: env!("CARGO_PKG_VERSION"),
            rng: RNG_ALGORITHM,
            master_seed,
            workers,
            config,
            extra: serde_json::Value::Null,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Header row plus one line per record.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<path>.meta.json` and returns its location.
pub fn write_metadata(path: &Path, meta: &RunMetadata) -> Result<PathBuf> {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    let out = PathBuf::from(name);
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&out, text + "\n")?;
    Ok(out)
}
