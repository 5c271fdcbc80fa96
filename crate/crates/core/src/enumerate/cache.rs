use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::machine::{GeneratorRun, Program, RunBudget, MACHINE_VERSION};

/// Environment variable naming the run cache directory.
pub const CACHE_DIR_ENV: &str = "CTOE_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt cache record in {path} line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// On-disk memo of generator runs keyed by (machine version, budget,
/// program bits). One JSON-lines file per (version, budget); each line is
/// one [`GeneratorRun`]. Results never depend on whether the cache is used.
#[derive(Debug, Clone)]
pub struct RunCache {
    dir: PathBuf,
}

impl RunCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Cache rooted at `$CTOE_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file_for(&self, budget: RunBudget) -> PathBuf {
        self.dir.join(format!(
            "{}-steps{}-out{}.jsonl",
            MACHINE_VERSION,
            budget.max_steps(),
            budget.max_output_bits()
        ))
    }

    pub fn load(&self, budget: RunBudget) -> Result<HashMap<Program, GeneratorRun>, CacheError> {
        let path = self.file_for(budget);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
            Err(source) => return Err(CacheError::Io { path, source }),
        };
        let mut map = HashMap::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| CacheError::Io {
                path: path.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let run: GeneratorRun = serde_json::from_str(&line).map_err(|source| CacheError::Corrupt {
                path: path.clone(),
                line: n + 1,
                source,
            })?;
            map.insert(run.program.clone(), run);
        }
        Ok(map)
    }

    pub fn append(&self, budget: RunBudget, runs: &[GeneratorRun]) -> Result<(), CacheError> {
        if runs.is_empty() {
            return Ok(());
        }
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CacheError::Io { path, source }
        };
        fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let path = self.file_for(budget);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io(&path))?;
        let mut w = BufWriter::new(file);
        for run in runs {
            let line = serde_json::to_string(run).expect("run records serialize");
            writeln!(w, "{line}").map_err(io(&path))?;
        }
        w.flush().map_err(io(&path))
    }
}
