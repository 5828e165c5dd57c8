//! Mesh and report writers: ASCII PLY and OBJ for embedded meshes, CSV
//! tables and a JSON summary for diagnostics.
//!
//! All numbers are written in Rust's shortest round-trip form, so identical
//! runs produce byte-identical files and CSV values re-parse exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::EmbeddedMesh;

/// ASCII PLY with float64 vertices and triangle faces.
pub fn write_ply(mesh: &EmbeddedMesh, path: impl AsRef<Path>) -> Result<()> {
    let tris = mesh.triangles();
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", mesh.len());
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    let _ = writeln!(s, "element face {}", tris.len());
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
    }
    for t in &tris {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    fs::write(path.as_ref(), s).map_err(|e| Error::io(path.as_ref(), e))
}

/// Wavefront OBJ (1-based indices).
pub fn write_obj(mesh: &EmbeddedMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    fs::write(path.as_ref(), s).map_err(|e| Error::io(path.as_ref(), e))
}

/// Simple numeric table with named columns.
#[derive(Debug, Clone, Default)]
pub struct ReportTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ReportTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// UTF-8 CSV with a header row.
pub fn write_csv(table: &ReportTable, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), table.to_csv()).map_err(|e| Error::io(path.as_ref(), e))
}

/// JSON summary of scalar diagnostics keyed by check name (sorted keys).
pub fn write_json_summary(entries: &BTreeMap<String, f64>, path: impl AsRef<Path>) -> Result<()> {
    let body = serde_json::to_string_pretty(entries)
        .map_err(|e| Error::Parse(format!("summary serialization failed: {e}")))?;
    fs::write(path.as_ref(), body + "\n").map_err(|e| Error::io(path.as_ref(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ChartGrid, GraphFunction};
    use crate::mesh::embed_graph;

    #[test]
    fn ply_counts_match() {
        // 3x3 grid plane: 9 vertices, 4 quads, 8 triangles.
        let grid = ChartGrid::parabolic_box(2, &[(-1.0, 1.0, 3)], 0.5, 1.5, 3);
        // parabolic_box insists on >= 5 nodes; build the axes directly.
        assert!(grid.is_err());
        let grid = ChartGrid {
            case: crate::geometry::ChartCase::Parabolic { n: 2 },
            axes: vec![
                crate::grid::GridAxis {
                    origin: -1.0,
                    h: 1.0,
                    count: 3,
                    periodic: false,
                    lo: Some(crate::grid::AxisEnd::Dirichlet(crate::grid::EdgeLabel::Artificial)),
                    hi: Some(crate::grid::AxisEnd::Dirichlet(crate::grid::EdgeLabel::Artificial)),
                },
                crate::grid::GridAxis {
                    origin: 0.5,
                    h: 0.5,
                    count: 3,
                    periodic: false,
                    lo: Some(crate::grid::AxisEnd::Dirichlet(crate::grid::EdgeLabel::Ideal)),
                    hi: Some(crate::grid::AxisEnd::Dirichlet(crate::grid::EdgeLabel::Artificial)),
                },
            ],
        };
        let u = GraphFunction::constant(grid, 1.0);
        let mesh = embed_graph(&u).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ply");
        write_ply(&mesh, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("element vertex 9"));
        assert!(text.contains("element face 8"));
        assert!(text.contains("property double x"));
    }

    #[test]
    fn csv_round_trips_exactly() {
        let mut t = ReportTable::new(&["a", "b"]);
        t.push(vec![std::f64::consts::PI, 1.0 / 3.0]);
        t.push(vec![-1.2345678901234567e-8, 42.0]);
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "a,b");
        for (line, row) in lines.zip(&t.rows) {
            for (cell, v) in line.split(',').zip(row) {
                assert_eq!(cell.parse::<f64>().unwrap(), *v);
            }
        }
    }

    #[test]
    fn json_summary_has_sorted_keys() {
        let mut m = BTreeMap::new();
        m.insert("trace_max_err".to_string(), 1e-3);
        m.insert("residual_max".to_string(), 1e-11);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        write_json_summary(&m, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let r = text.find("residual_max").unwrap();
        let t = text.find("trace_max_err").unwrap();
        assert!(r < t);
    }
}
