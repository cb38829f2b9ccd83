use crate::geometry::{Point3, TriMesh, Vector3};

/// Triangles prepared for repeated ray queries.
pub(crate) struct RayMesh {
    origins: Vec<Point3>,
    edges: Vec<(Vector3, Vector3)>,
}

impl RayMesh {
    pub(crate) fn new(mesh: &TriMesh) -> Self {
        let (origins, edges) = (0..mesh.faces().len())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                (a, (b - a, c - a))
            })
            .unzip();
        Self { origins, edges }
    }

    /// Möller–Trumbore intersection; returns the ray parameter of the hit.
    fn intersect(&self, face: usize, origin: &Point3, dir: &Vector3) -> Option<f64> {
        let (e1, e2) = &self.edges[face];
        let p = dir.cross(e2);
        let det = e1.dot(&p);
        if det.abs() < 1e-14 {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - self.origins[face];
        let u = s.dot(&p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(e1);
        let v = dir.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        Some(e2.dot(&q) * inv)
    }

    /// True if any face is hit with parameter in `(t_min, t_max)`.
    pub(crate) fn hits_between(&self, origin: &Point3, dir: &Vector3, t_min: f64, t_max: f64) -> bool {
        (0..self.origins.len()).any(|f| {
            self.intersect(f, origin, dir)
                .is_some_and(|t| t > t_min && t < t_max)
        })
    }

    /// Nearest hit beyond `t_min`, as `(t, face)`.
    pub(crate) fn first_hit(&self, origin: &Point3, dir: &Vector3, t_min: f64) -> Option<(f64, usize)> {
        (0..self.origins.len())
            .filter_map(|f| self.intersect(f, origin, dir).filter(|&t| t > t_min).map(|t| (t, f)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
    }

    /// Parity test for a closed mesh. The direction is deliberately generic
    /// to avoid grazing edges and vertices of axis-aligned geometry.
    pub(crate) fn contains(&self, p: &Point3) -> bool {
        let dir = Vector3::new(0.5773, 0.3141, 0.7538).normalize();
        let crossings = (0..self.origins.len())
            .filter(|&f| self.intersect(f, p, &dir).is_some_and(|t| t > 0.0))
            .count();
        crossings % 2 == 1
    }
}
