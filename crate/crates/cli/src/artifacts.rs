//! Output files and the manifest that records them.

use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use ctoe::machine::MACHINE_VERSION;

use crate::config::ExperimentConfig;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

/// One output file, fully rendered in memory.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable report");
        bytes.push(b'\n');
        Self {
            name: name.into(),
            bytes,
        }
    }

    /// CSV with a header row; every record is a list of fields.
    pub fn csv(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        for row in rows {
            w.write_record(&row).expect("in-memory write");
        }
        Self {
            name: name.into(),
            bytes: w.into_inner().expect("in-memory flush"),
        }
    }

    pub fn raw(name: &str, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Serialize)]
struct ManifestEntry {
    file: String,
    bytes: usize,
    sha256: String,
}

/// Everything except `created_unix` is a pure function of the config.
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: String,
    machine_version: &'static str,
    seed: u64,
    config: &'a ExperimentConfig,
    artifacts: Vec<ManifestEntry>,
    created_unix: u64,
}

/// Writes the artifacts and the manifest into `dir`.
pub fn write_all(dir: &Path, config: &ExperimentConfig, artifacts: &[Artifact]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: config.command.name(),
        machine_version: MACHINE_VERSION,
        seed: config.seed,
        config,
        artifacts: artifacts
            .iter()
            .map(|a| ManifestEntry {
                file: a.name.clone(),
                bytes: a.bytes.len(),
                sha256: a.sha256(),
            })
            .collect(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let m = Artifact::json(MANIFEST_FILE, &manifest);
    fs::write(dir.join(MANIFEST_FILE), m.bytes)
}
