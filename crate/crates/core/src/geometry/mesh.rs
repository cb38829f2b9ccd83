use super::{is_finite_point, Point3, RigidTransform, Vector3};
use crate::error::{Error, Result};

const MIN_FACE_AREA: f64 = 1e-12;

/// Indexed triangle mesh. Faces reference valid, pairwise-distinct vertices
/// and have area above 1e-12 mm².
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|p| !is_finite_point(p)) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} references a vertex out of range ({} vertices)",
                    vertices.len()
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} repeats a vertex")));
            }
            let area = triangle_area(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
            if area <= MIN_FACE_AREA {
                return Err(Error::InvalidMesh(format!("face {fi} has area {area:e}")));
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn triangle(&self, face: usize) -> [Point3; 3] {
        let f = self.faces[face];
        [self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        triangle_area(&a, &b, &c)
    }

    /// Unit normal following the counter-clockwise winding.
    pub fn face_normal(&self, face: usize) -> Vector3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Area-weighted centroid of the surface.
    pub fn centroid(&self) -> Point3 {
        let mut acc = Vector3::zeros();
        let mut total = 0.0;
        for f in 0..self.faces.len() {
            let [a, b, c] = self.triangle(f);
            let area = triangle_area(&a, &b, &c);
            acc += (a.coords + b.coords + c.coords) * (area / 3.0);
            total += area;
        }
        if total > 0.0 {
            Point3::from(acc / total)
        } else {
            Point3::origin()
        }
    }

    /// Signed enclosed volume (positive for outward-facing winding).
    pub fn signed_volume(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
            })
            .sum()
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| t.transform_point(p)).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn translated(&self, offset: Vector3) -> TriMesh {
        self.transformed(&RigidTransform::from_translation(offset))
    }

    /// Euclidean distance from `p` to the closest point of the surface.
    pub fn distance_to_surface(&self, p: &Point3) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                (closest_point_on_triangle(p, &a, &b, &c) - p).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision Detection §5.1.5).
pub(crate) fn closest_point_on_triangle(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}
