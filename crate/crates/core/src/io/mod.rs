//! File formats: versioned JSON inputs and reports, CSV field exports and a
//! legacy-VTK structured grid.
//!
//! Every JSON document carries `"schema_version": 1`. Node-indexed arrays
//! follow the grid's linear order `i + n1 * j`; arrays over Dirichlet or
//! free-boundary nodes follow the same order restricted to those nodes.

mod config;
mod fields;
mod schema;

pub use config::{GridSpec, OutputSpec, Problem, RunConfig, VerifySource, VerifySpec};
pub use fields::{
    read_fields, read_history, read_strains, read_vtk, write_fields, write_history, write_strains, write_vtk,
    FieldRecord, StrainRecord, VtkData,
};
pub use schema::{BoundaryFile, LoadFile, MaterialSpec, MatrixField, PositionField, VectorField};

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: malformed JSON: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl IoError {
    pub(crate) fn invalid(path: &Path, message: impl Into<String>) -> Self {
        IoError::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn path(&self) -> &Path {
        match self {
            IoError::Read { path, .. }
            | IoError::Write { path, .. }
            | IoError::Json { path, .. }
            | IoError::Invalid { path, .. } => path,
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a JSON document, checks and strips `schema_version`, then
/// deserializes the remaining fields.
pub fn read_versioned<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_text(path)?;
    parse_versioned(&text, path)
}

pub fn parse_versioned<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, IoError> {
    let json = |source| IoError::Json {
        path: path.to_path_buf(),
        source,
    };
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(json)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| IoError::invalid(path, "top level must be a JSON object"))?;
    match obj.remove("schema_version") {
        None => return Err(IoError::invalid(path, "missing \"schema_version\"")),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(IoError::invalid(
                path,
                format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})"),
            ))
        }
    }
    serde_json::from_value(value).map_err(json)
}

/// Pretty JSON with `schema_version` first and a trailing newline.
pub fn to_versioned_string<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let inner = serde_json::to_value(value)?;
    let mut out = serde_json::Map::new();
    out.insert("schema_version".into(), SCHEMA_VERSION.into());
    match inner {
        serde_json::Value::Object(m) => out.extend(m),
        other => {
            out.insert("value".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(out))?;
    s.push('\n');
    Ok(s)
}

pub fn write_versioned<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = to_versioned_string(value).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    write_text(path, &text)
}
