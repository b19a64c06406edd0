//! Deterministic text outputs: CSV reports, vector files, VTK dumps.
//!
//! Every writer here is byte-deterministic for identical inputs: floats
//! are printed with the shortest round-trip representation, rows keep
//! their given order, and no timestamps appear in report bodies. The run
//! manifest is the single place that records wall-clock time, so that
//! repeated runs with the same seed produce identical report files.

use std::io::Write as _;
use std::path::Path;

use crate::geometry::atlas::ChartCheckRow;
use crate::mesh::Mesh;
use crate::{Error, Result};

/// One row of a numeric check report.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub check_id: String,
    pub parameter: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(check_id: &str, parameter: &str, value: f64, bound: f64, pass: bool) -> CheckRow {
        CheckRow {
            check_id: check_id.to_string(),
            parameter: parameter.to_string(),
            value,
            bound,
            pass,
        }
    }

    /// Pass when the value does not exceed the bound.
    pub fn bounded(check_id: &str, parameter: &str, value: f64, bound: f64) -> CheckRow {
        CheckRow::new(check_id, parameter, value, bound, value <= bound)
    }
}

/// Geometry validation rows: `chart_id,check,max_deviation,pass`.
pub fn chart_rows_to_csv(rows: &[ChartCheckRow]) -> String {
    let mut s = String::from("chart_id,check,max_deviation,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:?},{}\n",
            r.chart_id, r.check, r.max_deviation, r.pass
        ));
    }
    s
}

/// Numeric check rows: `check_id,parameter,value,bound,pass`.
pub fn check_rows_to_csv(rows: &[CheckRow]) -> String {
    let mut s = String::from("check_id,parameter,value,bound,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:?},{:?},{}\n",
            r.check_id, r.parameter, r.value, r.bound, r.pass
        ));
    }
    s
}

/// Vector file: `dof,value` with shortest round-trip floats.
pub fn vector_to_csv(values: &[f64]) -> String {
    let mut s = String::from("dof,value\n");
    for (i, v) in values.iter().enumerate() {
        s.push_str(&format!("{},{:?}\n", i, v));
    }
    s
}

/// Parse a vector file written by `vector_to_csv` (fail closed).
pub fn vector_from_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != "dof,value" {
        return Err(Error::ConfigError {
            detail: format!("vector file header must be 'dof,value', got '{}'", header),
        });
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (i, v) = line.split_once(',').ok_or_else(|| Error::ConfigError {
            detail: format!("vector line without comma: '{}'", line),
        })?;
        let idx: usize = i.trim().parse().map_err(|_| Error::ConfigError {
            detail: format!("bad dof index '{}'", i),
        })?;
        if idx != k {
            return Err(Error::ConfigError {
                detail: format!("vector rows out of order: expected {}, got {}", k, idx),
            });
        }
        let val: f64 = v.trim().parse().map_err(|_| Error::ConfigError {
            detail: format!("bad value '{}'", v),
        })?;
        out.push(val);
    }
    Ok(out)
}

/// Write the run manifest: the one file allowed to carry timestamps.
/// Lists every produced file with its byte length.
pub fn write_manifest(dir: &Path, produced: &[(String, u64)]) -> Result<()> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut f = std::fs::File::create(dir.join("manifest.txt"))?;
    writeln!(f, "generated_unix_seconds = {}", stamp)?;
    writeln!(f, "files = {}", produced.len())?;
    for (name, bytes) in produced {
        writeln!(f, "{} {}", name, bytes)?;
    }
    Ok(())
}

/// Write a text file and record it for the manifest.
pub fn emit(dir: &Path, name: &str, body: &str, produced: &mut Vec<(String, u64)>) -> Result<()> {
    std::fs::write(dir.join(name), body)?;
    produced.push((name.to_string(), body.len() as u64));
    Ok(())
}

/// Legacy ASCII VTK dump of a mesh with optional vertex scalar fields,
/// for inspection in standard viewers.
pub fn mesh_to_vtk(mesh: &Mesh, point_data: &[(&str, &[f64])]) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("mixform output\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {} double\n", mesh.n_vertices()));
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        let z = if mesh.dim == 3 { p[2] } else { 0.0 };
        s.push_str(&format!("{:?} {:?} {:?}\n", p[0], p[1], z));
    }
    let k = mesh.dim + 1;
    s.push_str(&format!(
        "CELLS {} {}\n",
        mesh.n_cells(),
        mesh.n_cells() * (k + 1)
    ));
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("{} {}\n", k, ids.join(" ")));
    }
    s.push_str(&format!("CELL_TYPES {}\n", mesh.n_cells()));
    let vtk_type = if mesh.dim == 2 { 5 } else { 10 };
    for _ in 0..mesh.n_cells() {
        s.push_str(&format!("{}\n", vtk_type));
    }
    if !point_data.is_empty() {
        s.push_str(&format!("POINT_DATA {}\n", mesh.n_vertices()));
        for (name, vals) in point_data {
            s.push_str(&format!("SCALARS {} double 1\nLOOKUP_TABLE default\n", name));
            for v in *vals {
                s.push_str(&format!("{:?}\n", v));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_csv_roundtrip_is_exact() {
        let v = vec![0.1, -2.5e-17, std::f64::consts::PI, 1.0 / 3.0];
        let text = vector_to_csv(&v);
        let back = vector_from_csv(&text).unwrap();
        assert_eq!(v.len(), back.len());
        for (a, b) in v.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn vector_csv_rejects_malformed_input() {
        assert!(vector_from_csv("wrong,header\n0,1.0\n").is_err());
        assert!(vector_from_csv("dof,value\n1,1.0\n").is_err()); // gap
        assert!(vector_from_csv("dof,value\n0,abc\n").is_err());
    }

    #[test]
    fn check_rows_format_is_stable() {
        let rows = vec![
            CheckRow::bounded("det_modulus", "chart_a", 5e-16, 1e-12),
            CheckRow::new("growth", "level_2", 1.25, 1.1, false),
        ];
        let csv = check_rows_to_csv(&rows);
        assert_eq!(
            csv,
            "check_id,parameter,value,bound,pass\n\
             det_modulus,chart_a,5e-16,1e-12,true\n\
             growth,level_2,1.25,1.1,false\n"
        );
    }

    #[test]
    fn vtk_dump_has_the_legacy_header() {
        let mesh = crate::mesh::structured_rect(
            1,
            1,
            [0.0, 0.0],
            [1.0, 1.0],
            crate::mesh::DiagonalRule::Fixed,
        );
        let vals = vec![0.0; mesh.n_vertices()];
        let vtk = mesh_to_vtk(&mesh, &[("u", &vals)]);
        assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(vtk.contains("CELL_TYPES 2"));
        assert!(vtk.contains("SCALARS u double 1"));
    }

    #[test]
    fn manifest_lists_emitted_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut produced = Vec::new();
        emit(dir.path(), "a.csv", "x,y\n1,2\n", &mut produced).unwrap();
        write_manifest(dir.path(), &produced).unwrap();
        let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("files = 1"));
        assert!(manifest.contains("a.csv 8"));
    }
}
