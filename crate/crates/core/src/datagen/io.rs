use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::manifest::Manifest;
use super::table::Role;
use super::DatasetPack;
use crate::error::{Error, IoContext, Result};
use crate::matrix::{write_atomic, TimeMatrix};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MATRIX_EXT: &str = "mat";

/// Writes every matrix as `<name>.mat` and the manifest as `manifest.json`.
/// The manifest goes last so a readable manifest implies a complete pack.
pub fn write_pack(pack: &DatasetPack, dir: &Path) -> Result<()> {
    pack.verify()?;
    std::fs::create_dir_all(dir).at(dir)?;
    for entry in &pack.manifest.matrices {
        let m = pack.get(&entry.name).expect("verified pack has every matrix");
        m.write_mat(&dir.join(format!("{}.{MATRIX_EXT}", entry.name)))?;
    }
    let mut json = serde_json::to_string_pretty(&pack.manifest)?;
    json.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), json.as_bytes())
}

/// Writes every matrix of the pack as `<name>.csv`.
pub fn export_csv(pack: &DatasetPack, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).at(dir)?;
    for entry in &pack.manifest.matrices {
        let m = pack.get(&entry.name).expect("pack has every manifest matrix");
        m.write_csv(&dir.join(format!("{}.csv", entry.name)))?;
    }
    Ok(())
}

/// A pack on disk whose matrices are loaded on demand.
#[derive(Debug, Clone)]
pub struct PackDir {
    dir: PathBuf,
    manifest: Manifest,
}

impl PackDir {
    /// Reads and validates the manifest without touching any matrix.
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).at(&path)?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        manifest.validate()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// Loads one matrix and checks it against its manifest entry.
    pub fn load(&self, name: &str) -> Result<TimeMatrix> {
        let entry = self
            .manifest
            .entry(name)
            .ok_or_else(|| Error::InvalidManifest(format!("no matrix named {name}")))?;
        let m = TimeMatrix::read_mat(&self.dir.join(format!("{name}.{MATRIX_EXT}")))?;
        if m.shape() != (entry.rows, entry.cols) {
            return Err(Error::ShapeMismatch {
                name: name.to_string(),
                expected_rows: entry.rows,
                expected_cols: entry.cols,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if let Some((row, col)) = m.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        Ok(m)
    }

    pub fn load_all(&self) -> Result<DatasetPack> {
        let mut train = BTreeMap::new();
        let mut test = BTreeMap::new();
        for entry in &self.manifest.matrices {
            let m = Arc::new(self.load(&entry.name)?);
            match entry.role {
                Role::Train => train.insert(entry.name.clone(), m),
                Role::Test => test.insert(entry.name.clone(), m),
            };
        }
        let pack = DatasetPack {
            manifest: self.manifest.clone(),
            train,
            test,
        };
        pack.verify()?;
        Ok(pack)
    }
}

pub fn read_pack(dir: &Path) -> Result<DatasetPack> {
    PackDir::open(dir)?.load_all()
}
