//! Run-directory plumbing: atomic writes, stage stamps, checksums.
//!
//! Every stage directory carries a `.stamp.json` written after all of its
//! outputs, listing their SHA-256 checksums. A stage whose stamp validates
//! is skipped on rerun, which makes interrupted runs resumable and deleted
//! intermediates reproducible.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const STAMP_FILE: &str = ".stamp.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path
        .parent()
        .ok_or_else(|| Error::Config(format!("no parent directory for {}", path.display())))?;
    ensure_dir(parent)?;
    let mut tmp = PathBuf::from(path);
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    tmp.set_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_string(path)?)?)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stamp {
    pub checksums: BTreeMap<String, String>,
}

/// Writes a stage's files atomically and stamps the directory.
pub fn write_stage(dir: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<()> {
    ensure_dir(dir)?;
    let mut checksums = BTreeMap::new();
    for (name, bytes) in files {
        write_atomic(&dir.join(name), bytes)?;
        checksums.insert(name.clone(), sha256_hex(bytes));
    }
    let stamp = Stamp { checksums };
    write_atomic(&dir.join(STAMP_FILE), to_json_pretty(&stamp)?.as_bytes())
}

/// True when the stamp exists and every listed file matches its checksum.
pub fn stage_is_valid(dir: &Path) -> bool {
    let Ok(stamp) = read_json::<Stamp>(&dir.join(STAMP_FILE)) else {
        return false;
    };
    stamp.checksums.iter().all(|(name, expected)| {
        std::fs::read(dir.join(name))
            .map(|bytes| sha256_hex(&bytes) == *expected)
            .unwrap_or(false)
    })
}

/// Formats one CSV line; fields are expected not to contain commas (IRIs
/// and numbers here never do).
pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

/// All stamped artifact checksums under a run directory, keyed by path
/// relative to the root.
pub fn collect_checksums(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let Ok(entries) = std::fs::read_dir(&dir) else {
            continue;
        };
        for entry in entries.flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().and_then(|n| n.to_str()) == Some(STAMP_FILE) {
                if let Ok(stamp) = read_json::<Stamp>(&path) {
                    let prefix = dir.strip_prefix(root).unwrap_or(&dir);
                    for (name, checksum) in stamp.checksums {
                        out.insert(prefix.join(&name).display().to_string(), checksum);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamped_stage_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let stage = dir.path().join("stage");
        let mut files = BTreeMap::new();
        files.insert("a.txt".to_string(), b"hello".to_vec());
        files.insert("b.txt".to_string(), b"world".to_vec());
        write_stage(&stage, &files).unwrap();
        assert!(stage_is_valid(&stage));
        // tamper
        std::fs::write(stage.join("a.txt"), b"HELLO").unwrap();
        assert!(!stage_is_valid(&stage));
        // delete
        std::fs::remove_file(stage.join("a.txt")).unwrap();
        assert!(!stage_is_valid(&stage));
    }

    #[test]
    fn missing_stamp_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        assert!(!stage_is_valid(dir.path()));
    }
}
