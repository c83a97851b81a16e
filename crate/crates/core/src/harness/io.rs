//! CSV ingestion and export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{Graph, SelectionMatrix};

/// Full-precision, round-trippable formatting used in every CSV we write.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Reads a numeric CSV into rows. Row and column numbers in errors are 1-based
/// and count data rows only.
pub fn read_rows(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let mut row = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                msg: format!("row {}, column {}: {field:?} is not a number", r + 1, c + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    path: path.to_path_buf(),
                    row: r + 1,
                    col: c + 1,
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            msg: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// N x T signal matrix, one row per node.
pub fn read_matrix_csv(path: &Path, has_header: bool) -> Result<Array2<f64>> {
    let rows = read_rows(path, has_header)?;
    let cols = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let n = flat.len() / cols;
    Array2::from_shape_vec((n, cols), flat).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// One point per row.
pub fn read_coords_csv(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>> {
    read_rows(path, has_header)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    write_text(path, &matrix_to_csv(m))
}

/// Edge list `i,j,weight` with `i < j`, 0-based vertex indices.
pub fn edge_list_csv(g: &Graph) -> String {
    let mut out = String::from("i,j,weight\n");
    for (i, j, w) in g.edges() {
        out.push_str(&format!("{i},{j},{}\n", fmt_f64(w)));
    }
    out
}

pub fn write_edge_list(path: &Path, g: &Graph) -> Result<()> {
    write_text(path, &edge_list_csv(g))
}

/// Coordinate format `row,col,value`, 0-based, one stored entry per line.
pub fn sparse_coo_text(m: &SelectionMatrix) -> String {
    let mut out = String::from("row,col,value\n");
    for (i, j) in m.entries() {
        out.push_str(&format!("{i},{j},1\n"));
    }
    out
}

pub fn write_sparse_coo(path: &Path, m: &SelectionMatrix) -> Result<()> {
    write_text(path, &sparse_coo_text(m))
}

/// Reads an edge list written by [`write_edge_list`].
pub fn read_edge_list(path: &Path, n: usize) -> Result<Graph> {
    let rows = read_rows(path, true)?;
    let mut edges = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != 3
            || row[0].fract() != 0.0
            || row[1].fract() != 0.0
            || row[0] < 0.0
            || row[1] < 0.0
        {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                msg: format!("row {}: expected i,j,weight with integer indices", r + 1),
            });
        }
        edges.push((row[0] as usize, row[1] as usize, row[2]));
    }
    Graph::from_edges(n, &edges)
}
