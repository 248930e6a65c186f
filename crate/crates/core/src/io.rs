//! The fld-json container: a JSON header plus row-major values, inline or
//! in a raw little-endian f64 sidecar.

use crate::error::{LabError, Result};
use crate::grid::{Grid, ScalarField};
use crate::operators::{MatrixField, VectorField};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FldDocument {
    pub dim: usize,
    pub h: f64,
    pub origin: Vec<f64>,
    pub counts: Vec<usize>,
    pub name: String,
    /// values per node (1 for scalars, n for vectors, n(n+1)/2 for matrices)
    #[serde(default = "one")]
    pub components: usize,
    /// indices of nodes excluded from analysis (singular families)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
    /// sidecar file name, relative to the header
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

/// A scalar field with its file metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRecord {
    pub name: String,
    pub field: ScalarField,
    pub excluded: Option<Vec<usize>>,
    pub provenance: Option<serde_json::Value>,
}

impl FieldRecord {
    pub fn new(name: &str, field: ScalarField) -> FieldRecord {
        FieldRecord { name: name.to_string(), field, excluded: None, provenance: None }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> LabError {
    LabError::Io(format!("{}: {e}", path.display()))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".bin");
    PathBuf::from(p)
}

fn header(grid: &Grid, name: &str, components: usize) -> FldDocument {
    let n = grid.dim();
    FldDocument {
        dim: n,
        h: grid.h(),
        origin: grid.origin()[..n].to_vec(),
        counts: grid.counts()[..n].to_vec(),
        name: name.to_string(),
        components,
        excluded: None,
        provenance: None,
        sidecar: None,
        values: None,
    }
}

fn write_doc(path: &Path, mut doc: FldDocument, values: Vec<f64>, binary: bool) -> Result<()> {
    if binary {
        let side = sidecar_path(path);
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(&side, bytes).map_err(|e| io_err(&side, e))?;
        doc.sidecar = Some(side.file_name().unwrap().to_string_lossy().into_owned());
    } else {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Format("inline JSON cannot hold non-finite values; use the binary sidecar".into()));
        }
        doc.values = Some(values);
    }
    let text = serde_json::to_string(&doc).map_err(|e| LabError::Format(e.to_string()))?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Reads the header and the value array (from inline JSON or the sidecar).
pub fn read_document(path: &Path) -> Result<(FldDocument, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut doc: FldDocument = serde_json::from_str(&text).map_err(|e| LabError::Format(e.to_string()))?;
    let values = match (doc.values.take(), &doc.sidecar) {
        (Some(v), _) => v,
        (None, Some(side)) => {
            let p = path.parent().unwrap_or(Path::new(".")).join(side);
            let bytes = fs::read(&p).map_err(|e| io_err(&p, e))?;
            if bytes.len() % 8 != 0 {
                return Err(LabError::Format("sidecar length is not a multiple of 8".into()));
            }
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
        }
        (None, None) => return Err(LabError::Format("no values and no sidecar".into())),
    };
    let nodes: usize = doc.counts.iter().product();
    if values.len() != nodes * doc.components {
        return Err(LabError::Format(format!(
            "expected {} values, found {}",
            nodes * doc.components,
            values.len()
        )));
    }
    Ok((doc, values))
}

fn grid_of(doc: &FldDocument) -> Result<Grid> {
    Grid::new(doc.dim, doc.h, &doc.origin, &doc.counts)
}

pub fn save_field(path: &Path, record: &FieldRecord, binary: bool) -> Result<()> {
    let mut doc = header(record.field.grid(), &record.name, 1);
    doc.excluded = record.excluded.clone();
    doc.provenance = record.provenance.clone();
    write_doc(path, doc, record.field.values().to_vec(), binary)
}

pub fn load_field(path: &Path) -> Result<FieldRecord> {
    let (doc, values) = read_document(path)?;
    if doc.components != 1 {
        return Err(LabError::Format(format!("expected a scalar field, found {} components", doc.components)));
    }
    let grid = grid_of(&doc)?;
    Ok(FieldRecord {
        name: doc.name,
        field: ScalarField::new(grid, values)?,
        excluded: doc.excluded,
        provenance: doc.provenance,
    })
}

pub fn save_vector_field(path: &Path, name: &str, field: &VectorField, binary: bool) -> Result<()> {
    let n = field.grid.dim();
    let values = field.values.iter().flat_map(|v| v[..n].to_vec()).collect();
    write_doc(path, header(&field.grid, name, n), values, binary)
}

/// Matrix entries are stored as the upper triangle, row by row.
pub fn save_matrix_field(path: &Path, name: &str, field: &MatrixField, binary: bool) -> Result<()> {
    let n = field.grid.dim();
    let mut values = Vec::with_capacity(field.values.len() * n * (n + 1) / 2);
    for m in &field.values {
        for i in 0..n {
            for j in i..n {
                values.push(m.get(i, j));
            }
        }
    }
    write_doc(path, header(&field.grid, name, n * (n + 1) / 2), values, binary)
}
