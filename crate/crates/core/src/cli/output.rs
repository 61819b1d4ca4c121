//! Output directory bookkeeping. Every file goes through [`OutputDir`], which
//! records its SHA-256 so the manifest can list it.

use std::fs;
use std::path::{Component, Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    /// Relative to the run's output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Mutex<Vec<FileEntry>>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Mutex::new(Vec::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `rel` under the root. Absolute paths and `..` are refused so
    /// nothing lands outside the directory.
    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let rel_path = Path::new(rel);
        if !rel_path.components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(Error::InvalidParameter(format!("output path '{rel}' leaves the output directory")));
        }
        let full = self.root.join(rel_path);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&full, bytes)?;
        self.record(rel.replace('\\', "/"), bytes);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    fn record(&self, path: String, bytes: &[u8]) {
        let entry = FileEntry {
            path,
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        };
        let mut files = self.files.lock().expect("file list lock");
        files.retain(|f| f.path != entry.path);
        files.push(entry);
    }

    /// A child directory whose files are later merged with [`Self::absorb`].
    pub fn child(&self, name: &str) -> Result<OutputDir> {
        if !Path::new(name).components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(Error::InvalidParameter(format!("subdirectory '{name}' leaves the output directory")));
        }
        OutputDir::create(&self.root.join(name))
    }

    pub fn absorb(&self, name: &str, child: OutputDir) {
        let entries = child.files.into_inner().expect("file list lock");
        let mut files = self.files.lock().expect("file list lock");
        files.extend(entries.into_iter().map(|mut e| {
            e.path = format!("{name}/{}", e.path);
            e
        }));
    }

    /// Entries sorted by path.
    pub fn entries(&self) -> Vec<FileEntry> {
        let mut v = self.files.lock().expect("file list lock").clone();
        v.sort_by(|a, b| a.path.cmp(&b.path));
        v
    }
}
