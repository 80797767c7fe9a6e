use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

/// SHA-256 of the crate version, the stage name and the compact JSON of the
/// config section feeding `stage`.
pub fn stage_key<T: Serialize>(stage: &str, section: &T) -> String {
    let body = serde_json::to_vec(section).expect("cache key section serializes");
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update([0u8]);
    h.update(stage.as_bytes());
    h.update([0u8]);
    h.update(&body);
    hex::encode(h.finalize())
}

/// Content-addressed stage outputs under one directory.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
    enabled: bool,
}

impl Cache {
    pub fn new(dir: PathBuf, enabled: bool) -> Self {
        Self { dir, enabled }
    }

    pub fn path(&self, stage: &str, key: &str, suffix: &str) -> PathBuf {
        self.dir.join(format!("{stage}-{}{suffix}", &key[..16]))
    }

    pub fn read(&self, path: &Path) -> Option<String> {
        if !self.enabled {
            return None;
        }
        fs::read_to_string(path).ok()
    }

    pub fn write(&self, path: &Path, contents: &str) -> Result<(), CliError> {
        if self.enabled {
            write_file(path, contents)?;
        }
        Ok(())
    }
}

/// Write through a uniquely named temporary file and rename into place, so
/// concurrent writers of the same entry never expose a partial file.
pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    static SEQ: AtomicUsize = AtomicUsize::new(0);
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(
        ".{}.{}.tmp",
        std::process::id(),
        SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
