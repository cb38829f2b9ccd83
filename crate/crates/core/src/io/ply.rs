use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{LabeledPointCloud, Modality, Point3};

/// ASCII PLY text with `x y z modality weight` per vertex.
pub fn ply_string(cloud: &LabeledPointCloud) -> String {
    let mut s = String::with_capacity(64 + cloud.len() * 48);
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", cloud.len());
    s.push_str(
        "property float x\nproperty float y\nproperty float z\n\
         property uchar modality\nproperty float weight\nend_header\n",
    );
    for (p, label, w) in cloud.iter() {
        let _ = writeln!(s, "{} {} {} {} {}", p.x, p.y, p.z, label.code(), w);
    }
    s
}

pub fn write_ply(path: &Path, cloud: &LabeledPointCloud) -> Result<()> {
    std::fs::write(path, ply_string(cloud)).map_err(|e| Error::io(path, e))
}

pub fn read_ply(path: &Path) -> Result<LabeledPointCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&text).map_err(|m| Error::parse(path, m))
}

/// Parses ASCII PLY. `x`, `y`, `z` are required; `modality` defaults to vision
/// and `weight` to 1 when absent. Other vertex properties are skipped, and
/// elements after `vertex` are ignored.
pub fn parse_ply(text: &str) -> std::result::Result<LabeledPointCloud, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err("missing `ply` magic".into());
    }
    let mut vertex_count = None;
    let mut props: Vec<String> = Vec::new();
    let mut in_vertex = false;
    let mut seen_vertex = false;
    loop {
        let line = lines.next().ok_or("unterminated header")?.trim();
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["format", fmt, _] => {
                if *fmt != "ascii" {
                    return Err(format!("unsupported format `{fmt}`"));
                }
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, n] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    if seen_vertex {
                        return Err("duplicate vertex element".into());
                    }
                    if vertex_count.is_some() {
                        return Err("vertex element must come first".into());
                    }
                    seen_vertex = true;
                    vertex_count = Some(n.parse::<usize>().map_err(|e| format!("bad count: {e}"))?);
                } else if !seen_vertex {
                    // An element before `vertex` would shift the data rows.
                    return Err(format!("element `{name}` before vertex is not supported"));
                }
            }
            ["property", "list", ..] if in_vertex => {
                return Err("list properties on vertices are not supported".into());
            }
            ["property", _ty, name] => {
                if in_vertex {
                    props.push((*name).to_string());
                }
            }
            ["property", ..] => {}
            ["end_header"] => break,
            _ => return Err(format!("unexpected header line `{line}`")),
        }
    }
    let n = vertex_count.ok_or("no vertex element")?;
    let col = |name: &str| props.iter().position(|p| p == name);
    let (ix, iy, iz) = match (col("x"), col("y"), col("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err("vertex element lacks x/y/z".into()),
    };
    let (im, iw) = (col("modality"), col("weight"));

    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for row in 0..n {
        let line = lines.next().ok_or_else(|| format!("expected {n} vertices, got {row}"))?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != props.len() {
            return Err(format!("vertex {row}: expected {} values, got {}", props.len(), vals.len()));
        }
        let f = |i: usize| -> std::result::Result<f64, String> {
            vals[i].parse::<f64>().map_err(|e| format!("vertex {row}: {e}"))
        };
        points.push(Point3::new(f(ix)?, f(iy)?, f(iz)?));
        labels.push(match im {
            Some(i) => {
                let code: u8 = vals[i].parse().map_err(|e| format!("vertex {row}: modality: {e}"))?;
                Modality::from_code(code).ok_or_else(|| format!("vertex {row}: unknown modality {code}"))?
            }
            None => Modality::Vision,
        });
        weights.push(match iw {
            Some(i) => f(i)?,
            None => 1.0,
        });
    }
    LabeledPointCloud::new(points, labels, weights).map_err(|e| e.to_string())
}
