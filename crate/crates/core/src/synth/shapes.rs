//! Procedural test objects.
//!
//! Every generated mesh is closed, outward-oriented and translated so that its
//! area-weighted surface centroid sits at the origin. None of the built-in
//! shapes has a proper rotational symmetry, so a pose is always recoverable in
//! principle from complete data.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, TriMesh, Vector3};
use crate::io::load_mesh;

/// Angular resolution of the lofted shapes.
const RING_SEGMENTS: usize = 48;

/// Which object to build, with its dimensions in millimetres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Narrow stem under a wider head whose top face is cut at a slant.
    /// The bounding box is `2·radius × 2·radius × height`.
    Knob { radius: f64, height: f64 },
    /// T-bar: a square-section crossbar with a stem attached off-centre.
    Handle {
        length: f64,
        width: f64,
        stem_length: f64,
    },
    /// Two stacked tetromino layers (S below, L above) of cubic cells.
    SlBlock { cell: f64 },
    /// Handle with one flattened side, a thin shaft, and a flat blade tip.
    Screwdriver {
        handle_radius: f64,
        handle_length: f64,
        shaft_radius: f64,
        shaft_length: f64,
    },
    /// A mesh file (OBJ or ASCII STL) used as-is.
    Custom { path: PathBuf },
}

impl ShapeSpec {
    pub fn knob() -> Self {
        ShapeSpec::Knob {
            radius: 15.0,
            height: 30.0,
        }
    }

    pub fn handle() -> Self {
        ShapeSpec::Handle {
            length: 60.0,
            width: 12.0,
            stem_length: 30.0,
        }
    }

    pub fn sl_block() -> Self {
        ShapeSpec::SlBlock { cell: 10.0 }
    }

    pub fn screwdriver() -> Self {
        ShapeSpec::Screwdriver {
            handle_radius: 12.0,
            handle_length: 45.0,
            shaft_radius: 3.0,
            shaft_length: 55.0,
        }
    }

    /// Short identifier used in scene ids and reports.
    pub fn name(&self) -> &'static str {
        match self {
            ShapeSpec::Knob { .. } => "knob",
            ShapeSpec::Handle { .. } => "handle",
            ShapeSpec::SlBlock { .. } => "slblock",
            ShapeSpec::Screwdriver { .. } => "screwdriver",
            ShapeSpec::Custom { .. } => "custom",
        }
    }

    /// Parses a built-in shape name into its default dimensions.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "knob" => Ok(Self::knob()),
            "handle" => Ok(Self::handle()),
            "slblock" | "sl-block" | "sl_block" => Ok(Self::sl_block()),
            "screwdriver" => Ok(Self::screwdriver()),
            other => Err(Error::InvalidParameter(format!("unknown shape `{other}`"))),
        }
    }

    fn check_dimensions(&self) -> Result<()> {
        let dims: Vec<(&str, f64)> = match self {
            ShapeSpec::Knob { radius, height } => vec![("radius", *radius), ("height", *height)],
            ShapeSpec::Handle {
                length,
                width,
                stem_length,
            } => {
                if length <= width {
                    return Err(Error::BadDimensions(format!(
                        "handle length {length} must exceed width {width}"
                    )));
                }
                vec![("length", *length), ("width", *width), ("stem_length", *stem_length)]
            }
            ShapeSpec::SlBlock { cell } => vec![("cell", *cell)],
            ShapeSpec::Screwdriver {
                handle_radius,
                handle_length,
                shaft_radius,
                shaft_length,
            } => {
                if shaft_radius >= handle_radius {
                    return Err(Error::BadDimensions(format!(
                        "shaft radius {shaft_radius} must be below handle radius {handle_radius}"
                    )));
                }
                vec![
                    ("handle_radius", *handle_radius),
                    ("handle_length", *handle_length),
                    ("shaft_radius", *shaft_radius),
                    ("shaft_length", *shaft_length),
                ]
            }
            ShapeSpec::Custom { .. } => vec![],
        };
        for (name, v) in dims {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::BadDimensions(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Builds the mesh for `spec`. Deterministic.
pub fn generate_shape(spec: &ShapeSpec) -> Result<TriMesh> {
    spec.check_dimensions()?;
    let mesh = match spec {
        ShapeSpec::Knob { radius, height } => knob(*radius, *height)?,
        ShapeSpec::Handle {
            length,
            width,
            stem_length,
        } => handle(*length, *width, *stem_length)?,
        ShapeSpec::SlBlock { cell } => sl_block(*cell)?,
        ShapeSpec::Screwdriver {
            handle_radius,
            handle_length,
            shaft_radius,
            shaft_length,
        } => screwdriver(*handle_radius, *handle_length, *shaft_radius, *shaft_length)?,
        ShapeSpec::Custom { path } => return load_mesh(path),
    };
    let c = mesh.centroid();
    Ok(mesh.translated(-c.coords))
}

fn knob(radius: f64, height: f64) -> Result<TriMesh> {
    let stem = 0.5 * radius;
    let shoulder = 0.45 * height;
    let slant = 0.4 * height;
    let circle = |r: f64, z: f64| ring(RING_SEGMENTS, |c, s| Point3::new(r * c, r * s, z));
    let rings = vec![
        circle(stem, 0.0),
        circle(stem, shoulder),
        circle(radius, shoulder),
        ring(RING_SEGMENTS, |c, s| {
            Point3::new(radius * c, radius * s, height - 0.5 * slant * (1.0 - c))
        }),
    ];
    loft(
        rings,
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(0.0, 0.0, height - 0.5 * slant),
    )
}

fn screwdriver(rh: f64, lh: f64, rs: f64, ls: f64) -> Result<TriMesh> {
    // One side of the handle is flattened at 70% of the radius.
    let grip = |r: f64, z: f64| ring(RING_SEGMENTS, move |c, s| Point3::new(r * c, (r * s).min(0.7 * r), z));
    let rod = |sx: f64, sy: f64, z: f64| ring(RING_SEGMENTS, move |c, s| Point3::new(sx * c, sy * s, z));
    let neck = (0.6 * rh).max(1.5 * rs);
    let tip = lh + ls;
    let rings = vec![
        grip(0.85 * rh, 0.0),
        grip(rh, 0.1 * lh),
        grip(rh, 0.8 * lh),
        grip(neck, lh),
        rod(rs, rs, lh),
        rod(rs, rs, lh + 0.85 * ls),
        rod(rs, 0.3 * rs, tip),
    ];
    loft(rings, Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.0, tip))
}

fn handle(length: f64, width: f64, stem_length: f64) -> Result<TriMesh> {
    let stem_x = 0.65 * length - 0.5 * width;
    let stem_x = stem_x.clamp(0.0, length - width);
    box_union(&[
        ([0.0, 0.0, 0.0], [length, width, width]),
        ([stem_x, width, 0.0], [stem_x + width, width + stem_length, width]),
    ])
}

/// Cells of the S layer (z = 0) and the L layer (z = 1).
pub(crate) const SL_CELLS: [[i32; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [2, 1, 0],
    [1, 1, 1],
    [2, 1, 1],
    [3, 1, 1],
    [3, 2, 1],
];

fn sl_block(cell: f64) -> Result<TriMesh> {
    let boxes: Vec<([f64; 3], [f64; 3])> = SL_CELLS
        .iter()
        .map(|c| {
            let lo = c.map(|v| v as f64 * cell);
            (lo, lo.map(|v| v + cell))
        })
        .collect();
    box_union(&boxes)
}

fn ring(n: usize, f: impl Fn(f64, f64) -> Point3) -> Vec<Point3> {
    (0..n)
        .map(|j| {
            let a = TAU * j as f64 / n as f64;
            f(a.cos(), a.sin())
        })
        .collect()
}

/// Closed surface through a stack of rings (counter-clockwise seen from +z,
/// bottom to top), capped with fans around `bottom` and `top`.
fn loft(rings: Vec<Vec<Point3>>, bottom: Point3, top: Point3) -> Result<TriMesh> {
    let n = rings[0].len();
    let mut vertices: Vec<Point3> = rings.concat();
    let b = vertices.len();
    vertices.push(bottom);
    vertices.push(top);
    let t = b + 1;
    let last = (rings.len() - 1) * n;
    let mut faces = Vec::new();
    for r in 0..rings.len() - 1 {
        for j in 0..n {
            let k = (j + 1) % n;
            let (a0, a1) = (r * n + j, r * n + k);
            let (b0, b1) = (a0 + n, a1 + n);
            faces.push([a0, a1, b1]);
            faces.push([a0, b1, b0]);
        }
    }
    for j in 0..n {
        let k = (j + 1) % n;
        faces.push([b, k, j]);
        faces.push([t, last + j, last + k]);
    }
    TriMesh::new(vertices, faces)
}

/// Surface of a union of axis-aligned boxes, meshed on the grid induced by all
/// box boundaries so that only exposed cell faces are emitted and adjacent
/// faces share vertices.
pub(crate) fn box_union(boxes: &[([f64; 3], [f64; 3])]) -> Result<TriMesh> {
    let axis = |a: usize| {
        let mut v: Vec<f64> = boxes.iter().flat_map(|(lo, hi)| [lo[a], hi[a]]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let grid = [axis(0), axis(1), axis(2)];
    let dims: [usize; 3] = std::array::from_fn(|a| grid[a].len() - 1);
    let occupied = |c: [i64; 3]| -> bool {
        if (0..3).any(|a| c[a] < 0 || c[a] >= dims[a] as i64) {
            return false;
        }
        let mid: Vec<f64> = (0..3)
            .map(|a| 0.5 * (grid[a][c[a] as usize] + grid[a][c[a] as usize + 1]))
            .collect();
        boxes
            .iter()
            .any(|(lo, hi)| (0..3).all(|a| lo[a] < mid[a] && mid[a] < hi[a]))
    };

    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vertex = |g: [usize; 3]| -> usize {
        *index.entry(g).or_insert_with(|| {
            vertices.push(Point3::new(grid[0][g[0]], grid[1][g[1]], grid[2][g[2]]));
            vertices.len() - 1
        })
    };
    let mut faces = Vec::new();
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let c = [i as i64, j as i64, k as i64];
                if !occupied(c) {
                    continue;
                }
                for a in 0..3 {
                    for positive in [false, true] {
                        let mut n = c;
                        n[a] += if positive { 1 } else { -1 };
                        if occupied(n) {
                            continue;
                        }
                        let (u, v) = ((a + 1) % 3, (a + 2) % 3);
                        let corner = |du: usize, dv: usize| {
                            let mut g = [i, j, k];
                            g[a] += positive as usize;
                            g[u] += du;
                            g[v] += dv;
                            g
                        };
                        let mut quad = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                        if !positive {
                            quad.reverse();
                        }
                        let q = quad.map(&mut vertex);
                        faces.push([q[0], q[1], q[2]]);
                        faces.push([q[0], q[2], q[3]]);
                    }
                }
            }
        }
    }
    TriMesh::new(vertices, faces)
}

/// Characteristic width of a shape: the smallest bounding-box extent.
pub fn min_extent(mesh: &TriMesh) -> f64 {
    let (lo, hi) = mesh.bounding_box();
    let d: Vector3 = hi - lo;
    d.x.min(d.y).min(d.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, HashSet};

    /// Every undirected edge must be used exactly twice, once per direction.
    fn assert_closed(mesh: &TriMesh) {
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for f in mesh.faces() {
            for e in 0..3 {
                *directed.entry((f[e], f[(e + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &n) in &directed {
            assert_eq!(n, 1, "edge {a}->{b} used {n} times");
            assert_eq!(directed.get(&(b, a)), Some(&1), "edge {a}->{b} has no twin");
        }
    }

    #[test]
    fn built_in_shapes_are_closed_centred_and_outward() {
        for spec in [ShapeSpec::knob(), ShapeSpec::handle(), ShapeSpec::sl_block(), ShapeSpec::screwdriver()] {
            let m = generate_shape(&spec).unwrap();
            assert_closed(&m);
            assert!(m.centroid().coords.norm() < 1e-9, "{}", spec.name());
            assert!(m.signed_volume() > 0.0, "{}", spec.name());
        }
    }

    #[test]
    fn knob_bounding_box() {
        let m = generate_shape(&ShapeSpec::Knob {
            radius: 15.0,
            height: 30.0,
        })
        .unwrap();
        let (lo, hi) = m.bounding_box();
        for d in (hi - lo).iter() {
            assert!((d - 30.0).abs() < 1e-6, "{d}");
        }
    }

    #[test]
    fn sl_block_matches_hand_count() {
        let m = generate_shape(&ShapeSpec::SlBlock { cell: 10.0 }).unwrap();
        // Exposed unit faces: 8 cells x 6 faces minus two per face-adjacent pair.
        let cells: HashSet<[i32; 3]> = SL_CELLS.iter().copied().collect();
        let mut exposed = Vec::new();
        for c in &SL_CELLS {
            for a in 0..3 {
                for s in [-1, 1] {
                    let mut n = *c;
                    n[a] += s;
                    if !cells.contains(&n) {
                        exposed.push((*c, a, s));
                    }
                }
            }
        }
        assert_eq!(exposed.len(), 32);
        assert!((m.surface_area() - 32.0 * 100.0).abs() < 1e-9);
        let mut corners = HashSet::new();
        for (c, a, s) in exposed {
            let (u, v) = ((a + 1) % 3, (a + 2) % 3);
            for du in 0..2 {
                for dv in 0..2 {
                    let mut p = c;
                    p[a] += (s > 0) as i32;
                    p[u] += du;
                    p[v] += dv;
                    corners.insert(p);
                }
            }
        }
        assert_eq!(m.vertices().len(), corners.len());
        assert_eq!(m.faces().len(), 64);
    }

    #[test]
    fn custom_mesh_passes_through() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tet.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n").unwrap();
        let m = generate_shape(&ShapeSpec::Custom { path: path.clone() }).unwrap();
        assert_eq!(m, load_mesh(&path).unwrap());
    }

    #[test]
    fn rejects_bad_dimensions() {
        for spec in [
            ShapeSpec::Knob {
                radius: 0.0,
                height: 3.0,
            },
            ShapeSpec::SlBlock { cell: -1.0 },
            ShapeSpec::Handle {
                length: 10.0,
                width: 12.0,
                stem_length: 5.0,
            },
            ShapeSpec::Screwdriver {
                handle_radius: 3.0,
                handle_length: 40.0,
                shaft_radius: 4.0,
                shaft_length: 50.0,
            },
        ] {
            assert!(matches!(generate_shape(&spec), Err(Error::BadDimensions(_))));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for spec in [ShapeSpec::knob(), ShapeSpec::handle(), ShapeSpec::screwdriver()] {
            assert_eq!(generate_shape(&spec).unwrap(), generate_shape(&spec).unwrap());
        }
    }
}
