//! CSV tables, binary dumps and the run manifest.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A CSV table whose header names each column and its unit.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::runtime("writing csv", e);
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::runtime("writing csv", e))
    }
}

/// Raw little-endian `f64` values in row-major order.
pub fn f64_dump(values: impl IntoIterator<Item = f64>) -> Vec<u8> {
    values.into_iter().flat_map(f64::to_le_bytes).collect()
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Writes every file in order and returns their checksums.
pub fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> CliResult<Vec<OutputFile>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(&format!("creating {}", dir.display()), e))?;
    files
        .iter()
        .map(|(name, data)| {
            let path = dir.join(name);
            std::fs::write(&path, data).map_err(|e| CliError::runtime(&format!("writing {}", path.display()), e))?;
            Ok(OutputFile {
                file: name.clone(),
                sha256: sha256_hex(data),
                bytes: data.len(),
            })
        })
        .collect()
}

pub fn pretty_json(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::runtime("serializing json", e))?;
    v.push(b'\n');
    Ok(v)
}
