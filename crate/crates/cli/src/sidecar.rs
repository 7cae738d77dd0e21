//! Every artifact gets a `<name>.meta.json` sidecar: the effective config,
//! the seed, a content hash of the artifact bytes, and a timestamp. The
//! timestamp lives only here, so artifact bytes stay reproducible.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use rough_merton::error::Result;

use crate::config::RunConfig;

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    seed: u64,
    content_sha256: String,
    created_unix: u64,
    config: &'a RunConfig,
}

pub fn write_sidecar(artifact: &Path, command: &str, seed: u64, config: &RunConfig) -> Result<()> {
    let bytes = std::fs::read(artifact)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    let sidecar = Sidecar {
        command,
        seed,
        content_sha256: hex,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config,
    };
    let meta_path = artifact.with_extension(format!(
        "{}.meta.json",
        artifact
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("out")
    ));
    std::fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}
