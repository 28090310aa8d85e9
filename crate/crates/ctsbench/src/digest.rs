// SPDX-License-Identifier: Apache-2.0

//! SHA-256 digests of files and directory trees.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

pub fn bytes_sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> crate::Result<String> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path, e))?;
    Ok(bytes_sha256(&bytes))
}

/// Digest of every regular file under `root`, keyed by `/`-separated relative
/// path. Files whose relative path is listed in `exclude` are skipped.
pub fn tree_digest(root: &Path, exclude: &[&str]) -> crate::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            crate::Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walk stays under root");
        let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if exclude.contains(&key.as_str()) {
            continue;
        }
        out.insert(key, file_sha256(entry.path())?);
    }
    Ok(out)
}

/// One digest over a whole tree listing.
pub fn combined_digest(tree: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (path, digest) in tree {
        h.update(path.as_bytes());
        h.update([0]);
        h.update(digest.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}
