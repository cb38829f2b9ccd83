use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point3, TriMesh};

/// Loads an OBJ or ASCII STL mesh, chosen by file extension.
pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("obj") => read_obj(path),
        Some("stl") => read_stl(path),
        _ => Err(Error::parse(path, "unsupported mesh extension (expected .obj or .stl)")),
    }
}

pub fn read_obj(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text).map_err(|m| Error::parse(path, m))
}

pub fn read_stl(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_stl(&text).map_err(|m| Error::parse(path, m))
}

/// OBJ with `v` and triangular `f` records. Face tokens may carry
/// `/vt/vn` suffixes and negative (relative) indices.
pub fn parse_obj(text: &str) -> std::result::Result<TriMesh, String> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| format!("line {}: {e}", ln + 1))?;
                if c.len() != 3 {
                    return Err(format!("line {}: vertex needs 3 coordinates", ln + 1));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tok
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|e| format!("line {}: {e}", ln + 1))?;
                        let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                        usize::try_from(resolved).map_err(|_| format!("line {}: bad index {i}", ln + 1))
                    })
                    .collect::<std::result::Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(format!("line {}: only triangles are supported", ln + 1));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces).map_err(|e| e.to_string())
}

/// ASCII STL; coincident vertices are merged exactly.
pub fn parse_stl(text: &str) -> std::result::Result<TriMesh, String> {
    let mut vertices: Vec<Point3> = Vec::new();
    let mut lookup = std::collections::HashMap::new();
    let mut faces = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    if !text.trim_start().starts_with("solid") {
        return Err("not an ASCII STL (missing `solid`)".into());
    }
    for (ln, line) in text.lines().enumerate() {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.first().copied() {
            Some("vertex") => {
                if tok.len() != 4 {
                    return Err(format!("line {}: vertex needs 3 coordinates", ln + 1));
                }
                let c: Vec<f64> = tok[1..]
                    .iter()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| format!("line {}: {e}", ln + 1))?;
                let key = [c[0].to_bits(), c[1].to_bits(), c[2].to_bits()];
                let id = *lookup.entry(key).or_insert_with(|| {
                    vertices.push(Point3::new(c[0], c[1], c[2]));
                    vertices.len() - 1
                });
                current.push(id);
            }
            Some("endloop") => {
                if current.len() != 3 {
                    return Err(format!("line {}: only triangles are supported", ln + 1));
                }
                faces.push([current[0], current[1], current[2]]);
                current.clear();
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces).map_err(|e| e.to_string())
}

pub fn obj_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn write_obj(path: &Path, mesh: &TriMesh) -> Result<()> {
    std::fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}
