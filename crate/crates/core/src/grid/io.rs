use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Boundary, Grid, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct FieldMeta {
    shape: Vec<usize>,
    extents: Vec<f64>,
    boundary: Boundary,
    parity: u8,
    dtype: String,
}

/// CSV with header `i0,…,value`, one row per point in row-major order.
pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let mut out: String = (0..grid.dims()).map(|a| format!("i{a},")).collect();
    out.push_str("value\n");
    for (i, v) in field.values().iter().enumerate() {
        let idx = grid.multi_index(i);
        for a in idx.iter().take(grid.dims()) {
            out.push_str(&format!("{a},"));
        }
        out.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a CSV written by [`write_field_csv`] onto `grid`.
pub fn read_field_csv(path: &Path, grid: &Grid) -> Result<ScalarField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.into(),
        reason,
    };
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = 0;
    for (no, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != grid.dims() + 1 {
            return Err(bad(format!(
                "line {}: expected {} columns",
                no + 1,
                grid.dims() + 1
            )));
        }
        let mut flat = 0;
        for (a, c) in cols[..grid.dims()].iter().enumerate() {
            let i: usize = c
                .trim()
                .parse()
                .map_err(|e| bad(format!("line {}: {e}", no + 1)))?;
            if i >= grid.points()[a] {
                return Err(bad(format!(
                    "line {}: index {i} out of range on axis {a}",
                    no + 1
                )));
            }
            flat = flat * grid.points()[a] + i;
        }
        values[flat] = cols[grid.dims()]
            .trim()
            .parse()
            .map_err(|e| bad(format!("line {}: {e}", no + 1)))?;
        seen += 1;
    }
    if seen != grid.len() {
        return Err(bad(format!("expected {} rows, found {seen}", grid.len())));
    }
    ScalarField::new(grid, values)
}

/// Raw little-endian f64 values plus a JSON sidecar with shape, extents and boundary.
pub fn write_field_raw(data_path: &Path, meta_path: &Path, field: &ScalarField) -> Result<()> {
    let bytes: Vec<u8> = field
        .values()
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect();
    fs::write(data_path, bytes).map_err(|e| Error::io(data_path, e))?;
    let grid = field.grid();
    let meta = FieldMeta {
        shape: grid.points().to_vec(),
        extents: grid.extents().to_vec(),
        boundary: grid.boundary(),
        parity: field.parity(),
        dtype: "f64-le".into(),
    };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(meta_path, json).map_err(|e| Error::io(meta_path, e))
}

pub fn read_field_raw(data_path: &Path, meta_path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?;
    let meta: FieldMeta = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: meta_path.into(),
        reason: e.to_string(),
    })?;
    if meta.dtype != "f64-le" {
        return Err(Error::Format {
            path: meta_path.into(),
            reason: format!("unsupported dtype {}", meta.dtype),
        });
    }
    let grid = Grid::new(&meta.extents, &meta.shape, meta.boundary)?;
    let bytes = fs::read(data_path).map_err(|e| Error::io(data_path, e))?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Format {
            path: data_path.into(),
            reason: format!("expected {} bytes, found {}", 8 * grid.len(), bytes.len()),
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScalarField::with_parity(&grid, values, meta.parity)
}
