//! On-disk store for per-prime local data.
//!
//! One JSON file per level and prime, tagged with the hash of the model it
//! was computed from. Anything unreadable or computed from another model is
//! treated as absent.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mwsieve::{LocalData, LocalStore};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct Entry {
    model_hash: String,
    local_data: LocalData,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(DiskCache { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, level: u64, ell: u64) -> PathBuf {
        self.root
            .join(format!("x0_{level}"))
            .join(format!("ell_{ell}.json"))
    }

    fn write(&self, model_hash: &str, data: &LocalData) -> io::Result<()> {
        let path = self.path_for(data.level, data.ell);
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir)?;
        let entry = Entry {
            model_hash: model_hash.to_string(),
            local_data: data.clone(),
        };
        let text = serde_json::to_string(&entry).map_err(io::Error::other)?;
        // Write then rename so concurrent readers never see a partial file.
        let tmp = dir.join(format!(".ell_{}.{}.tmp", data.ell, std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)
    }
}

impl LocalStore for DiskCache {
    fn load(&self, model_hash: &str, level: u64, ell: u64) -> Option<LocalData> {
        let text = fs::read_to_string(self.path_for(level, ell)).ok()?;
        let entry: Entry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => {
                log::warn!("ignoring unreadable cache entry for N={level}, ell={ell}: {e}");
                return None;
            }
        };
        if entry.model_hash != model_hash {
            log::debug!("stale cache entry for N={level}, ell={ell}");
            return None;
        }
        let d = entry.local_data;
        (d.level == level && d.ell == ell).then_some(d)
    }

    fn store(&self, model_hash: &str, data: &LocalData) {
        if let Err(e) = self.write(model_hash, data) {
            log::warn!("could not cache N={}, ell={}: {e}", data.level, data.ell);
        }
    }
}
