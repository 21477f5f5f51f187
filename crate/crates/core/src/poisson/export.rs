use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};

/// Sidecar describing a binary column dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub dim: usize,
    pub mesh_size: f64,
    pub origin: Vec<f64>,
    pub shape: Vec<usize>,
    pub bounding_box: (Vec<f64>, Vec<f64>),
    pub node_count: usize,
    pub node_order: String,
    /// Column names; each column is node_count little-endian f64 values.
    pub columns: Vec<String>,
    pub data_file: String,
}

fn coordinate_names(dim: usize) -> Vec<String> {
    if dim == 3 {
        vec!["x".into(), "y".into(), "z".into()]
    } else {
        (1..=dim).map(|k| format!("x{k}")).collect()
    }
}

/// Fixed 17-significant-digit rendering used by every text artifact.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per interior node: coordinates then value.
pub fn write_csv(field: &ScalarField, path: &Path) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    let mut header = coordinate_names(grid.dim());
    header.push("value".into());
    writeln!(w, "{}", header.join(","))?;
    for (i, v) in field.values().iter().enumerate() {
        for x in grid.point(i) {
            write!(w, "{},", format_f64(*x))?;
        }
        writeln!(w, "{}", format_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.bin` (coordinate columns then the value column) and
/// `<stem>.json`. Returns the sidecar path.
pub fn write_binary(field: &ScalarField, dir: &Path, stem: &str) -> Result<PathBuf> {
    let grid = field.grid();
    let n = grid.dim();
    let data_file = format!("{stem}.bin");
    let mut w = BufWriter::new(File::create(dir.join(&data_file))?);
    for a in 0..n {
        for i in 0..grid.len() {
            w.write_all(&grid.point(i)[a].to_le_bytes())?;
        }
    }
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let mut columns = coordinate_names(n);
    columns.push("value".into());
    let meta = GridMetadata {
        dim: n,
        mesh_size: grid.mesh_size(),
        origin: grid.origin().to_vec(),
        shape: grid.shape().to_vec(),
        bounding_box: grid.domain().bounding_box(),
        node_count: grid.len(),
        node_order: "lexicographic by lattice coordinate, last axis fastest".into(),
        columns,
        data_file,
    };
    let sidecar = dir.join(format!("{stem}.json"));
    std::fs::write(&sidecar, serde_json::to_string_pretty(&meta)?)?;
    Ok(sidecar)
}

/// Reads a dump written by [`write_binary`]: metadata and the columns.
pub fn read_binary(sidecar: &Path) -> Result<(GridMetadata, Vec<Vec<f64>>)> {
    let meta: GridMetadata = serde_json::from_str(&std::fs::read_to_string(sidecar)?)?;
    let dir = sidecar.parent().unwrap_or(Path::new("."));
    let mut bytes = Vec::new();
    File::open(dir.join(&meta.data_file))?.read_to_end(&mut bytes)?;
    let expected = 8 * meta.node_count * meta.columns.len();
    if bytes.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "binary dump has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let columns = values
        .chunks(meta.node_count.max(1))
        .map(<[f64]>::to_vec)
        .collect();
    Ok((meta, columns))
}
