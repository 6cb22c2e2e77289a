//! Corpus manifests: one `path,label` record per line, optional
//! `path,label` header, labels 0 (US) or 1 (non-US). No quoting, so paths
//! may not contain commas.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Count of entries per label (index 0 and 1).
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for e in &self.entries {
            counts[e.label as usize] += 1;
        }
        counts
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&text)
}

pub(crate) fn parse_manifest(text: &str) -> Result<CorpusManifest> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line == "path,label" {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(p), Some(l), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Manifest(format!(
                "line {}: expected exactly `path,label`, got {line:?}",
                lineno + 1
            )));
        };
        if p.is_empty() {
            return Err(Error::Manifest(format!("line {}: empty path", lineno + 1)));
        }
        let label: i64 = l.trim().parse().map_err(|_| {
            Error::Manifest(format!("line {}: label {l:?} is not an integer", lineno + 1))
        })?;
        if label != 0 && label != 1 {
            return Err(Error::Manifest(format!(
                "line {}: label {label} outside {{0, 1}} (0 = US, 1 = non-US)",
                lineno + 1
            )));
        }
        if !seen.insert(p.to_string()) {
            return Err(Error::Manifest(format!(
                "line {}: duplicate path {p:?}",
                lineno + 1
            )));
        }
        entries.push(ManifestEntry {
            path: p.to_string(),
            label: label as u8,
        });
    }
    if entries.is_empty() {
        return Err(Error::Manifest("manifest contains no entries".into()));
    }
    Ok(CorpusManifest { entries })
}

/// Writes a manifest with the standard header, in entry order.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("path,label\n");
    for e in entries {
        text.push_str(&format!("{},{}\n", e.path, e.label));
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
