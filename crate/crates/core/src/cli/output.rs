use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{write_field_csv, write_field_raw, ScalarField};

/// Round-trip decimal form with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}

/// Collects the files of one run so the manifest can list and hash them.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    bytes: u64,
    sha256: String,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut out = header.join(",");
        out.push('\n');
        for r in rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        let path = self.path(name);
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        self.record(name);
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value).expect("artifact serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.record(name);
        Ok(())
    }

    /// A field in both the CSV and the raw little-endian formats.
    pub fn field(&mut self, stem: &str, field: &ScalarField) -> Result<()> {
        let (csv, raw, meta) = (
            format!("{stem}.csv"),
            format!("{stem}.f64"),
            format!("{stem}.json"),
        );
        write_field_csv(&self.path(&csv), field)?;
        write_field_raw(&self.path(&raw), &self.path(&meta), field)?;
        for n in [csv, raw, meta] {
            self.record(&n);
        }
        Ok(())
    }

    /// Adds an externally written file to the listing.
    pub fn adopt(&mut self, name: &str) {
        self.record(name);
    }

    /// Writes `manifest.json` with a checksum for every recorded file.
    pub fn manifest(&self, body: serde_json::Value) -> Result<()> {
        let mut files = Vec::new();
        for name in &self.files {
            let path = self.path(name);
            let data = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            files.push(FileEntry {
                name: name.clone(),
                bytes: data.len() as u64,
                sha256: hex::encode(Sha256::digest(&data)),
            });
        }
        let mut body = body;
        body["files"] = serde_json::to_value(files).expect("file list serializes");
        let path = self.path("manifest.json");
        let text = serde_json::to_string_pretty(&body).expect("manifest serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
