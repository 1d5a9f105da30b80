use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::classify::Label;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path as written in the manifest; relative paths resolve against the
    /// manifest's directory.
    pub path: String,
    pub label: Label,
    /// Video or source identifier; frames of one group never straddle a split.
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    base_dir: PathBuf,
}

impl DatasetManifest {
    /// Validates that paths are unique.
    pub fn new(entries: Vec<ManifestEntry>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::new();
        let duplicates: Vec<&str> = entries
            .iter()
            .filter(|e| !seen.insert(e.path.as_str()))
            .map(|e| e.path.as_str())
            .collect();
        if !duplicates.is_empty() {
            return Err(Error::Validation(format!(
                "duplicate manifest paths: {}",
                duplicates.join(", ")
            )));
        }
        Ok(DatasetManifest {
            entries,
            base_dir: base_dir.into(),
        })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    /// Filesystem location of an entry.
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Entries at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> DatasetManifest {
        DatasetManifest {
            entries: indices.iter().map(|&i| self.entries[i].clone()).collect(),
            base_dir: self.base_dir.clone(),
        }
    }

    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path", "label", "group"])?;
        for e in &self.entries {
            let label = e.label.as_u8().to_string();
            w.write_record([
                e.path.as_str(),
                label.as_str(),
                e.group.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Reads a `path,label[,group]` CSV.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, path, base)
}

pub fn parse_manifest(text: &str, origin: &Path, base_dir: PathBuf) -> Result<DatasetManifest> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(origin, 1, e.to_string()))?
        .clone();
    let columns: Vec<&str> = header.iter().map(str::trim).collect();
    let has_group = match columns.as_slice() {
        ["path", "label"] => false,
        ["path", "label", "group"] => true,
        _ => {
            return Err(Error::parse(
                origin,
                1,
                format!(
                    "expected header `path,label[,group]`, found `{}`",
                    columns.join(",")
                ),
            ))
        }
    };

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(origin, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let expected = if has_group { 3 } else { 2 };
        if record.len() != expected {
            return Err(Error::parse(
                origin,
                line,
                format!("expected {expected} fields, found {}", record.len()),
            ));
        }
        let path = record[0].trim();
        if path.is_empty() {
            return Err(Error::parse(origin, line, "empty path"));
        }
        let label = record[1]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Label::from_u8)
            .ok_or_else(|| {
                Error::parse(
                    origin,
                    line,
                    format!("label must be 0 or 1, got `{}`", &record[1]),
                )
            })?;
        let group = if has_group {
            Some(record[2].trim())
                .filter(|g| !g.is_empty())
                .map(String::from)
        } else {
            None
        };
        entries.push(ManifestEntry {
            path: path.to_string(),
            label,
            group,
        });
    }
    DatasetManifest::new(entries, base_dir)
}
