//! Incremental 3-D convex hull (beneath-beyond), used for the cloud volume
//! metric.

use std::collections::HashSet;

use crate::geometry::{Point3, Vector3};

/// Outward-oriented triangulated hull.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    points: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl ConvexHull {
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn volume(&self) -> f64 {
        // Tetrahedra fanned from an interior reference point keep the sum well
        // conditioned for clouds far from the origin.
        let r = self.points[self.faces[0][0]];
        self.faces
            .iter()
            .map(|f| {
                let a = self.points[f[0]] - r;
                let b = self.points[f[1]] - r;
                let c = self.points[f[2]] - r;
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum::<f64>()
            .max(0.0)
    }
}

struct Face {
    v: [usize; 3],
    normal: Vector3,
    offset: f64,
    alive: bool,
}

impl Face {
    fn new(points: &[Point3], v: [usize; 3]) -> Self {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        let normal = if len > 0.0 { n / len } else { n };
        Face {
            v,
            normal,
            offset: normal.dot(&a.coords),
            alive: true,
        }
    }

    fn distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Hull of `points`, or `None` if they span less than three dimensions.
pub fn convex_hull(points: &[Point3]) -> Option<ConvexHull> {
    if points.len() < 4 {
        return None;
    }
    let scale = points
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs(), p.z.abs()])
        .fold(0.0f64, f64::max)
        .max(1.0);
    let extent = {
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (hi - lo).norm()
    };
    if extent == 0.0 {
        return None;
    }
    let eps = 1e-10 * scale.max(extent);

    // Initial simplex from extreme points.
    let i0 = (0..points.len())
        .min_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)))?;
    let i1 = farthest(points, |p| (p - points[i0]).norm())?;
    let dir = (points[i1] - points[i0]).normalize();
    let i2 = farthest(points, |p| {
        let d = p - points[i0];
        (d - dir * d.dot(&dir)).norm()
    })?;
    let plane_n = (points[i1] - points[i0]).cross(&(points[i2] - points[i0]));
    if plane_n.norm() <= eps * extent {
        return None;
    }
    let plane_n = plane_n.normalize();
    let i3 = farthest(points, |p| (p - points[i0]).dot(&plane_n).abs())?;
    if (points[i3] - points[i0]).dot(&plane_n).abs() <= eps {
        return None;
    }

    let mut faces: Vec<Face> = Vec::new();
    let interior = Point3::from((points[i0].coords + points[i1].coords + points[i2].coords + points[i3].coords) / 4.0);
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut f = Face::new(points, tri);
        if f.distance(&interior) > 0.0 {
            f = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(f);
    }

    let seed = [i0, i1, i2, i3];
    for (pi, p) in points.iter().enumerate() {
        if seed.contains(&pi) {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.distance(p) > eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &fi in &visible {
            let v = faces[fi].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]));
            }
            faces[fi].alive = false;
        }
        // Horizon edges are those whose twin is not on a visible face.
        let mut horizon: Vec<(usize, usize)> =
            edges.iter().copied().filter(|&(a, b)| !edges.contains(&(b, a))).collect();
        horizon.sort_unstable();
        for (a, b) in horizon {
            faces.push(Face::new(points, [a, b, pi]));
        }
        if faces.len() > 4 * points.len() + 64 {
            faces.retain(|f| f.alive);
        }
    }

    let faces: Vec<[usize; 3]> = faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect();
    Some(ConvexHull {
        points: points.to_vec(),
        faces,
    })
}

fn farthest(points: &[Point3], metric: impl Fn(&Point3) -> f64) -> Option<usize> {
    (0..points.len()).max_by(|&a, &b| metric(&points[a]).total_cmp(&metric(&points[b])).then(b.cmp(&a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(n⁴) oracle: every triple whose plane has all points on one side is a
    /// facet; sum the tetrahedra to an interior point.
    fn brute_force_volume(points: &[Point3]) -> f64 {
        let n = points.len();
        let centre = Point3::from(points.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n as f64);
        let mut vol = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let nrm = (points[j] - points[i]).cross(&(points[k] - points[i]));
                    let (mut pos, mut neg) = (false, false);
                    for (m, p) in points.iter().enumerate() {
                        if m == i || m == j || m == k {
                            continue;
                        }
                        let s = nrm.dot(&(p - points[i]));
                        if s > 0.0 {
                            pos = true;
                        } else if s < 0.0 {
                            neg = true;
                        }
                    }
                    if pos != neg {
                        let a = points[i] - centre;
                        let b = points[j] - centre;
                        let c = points[k] - centre;
                        vol += a.dot(&b.cross(&c)).abs() / 6.0;
                    }
                }
            }
        }
        vol
    }

    #[test]
    fn matches_brute_force_on_random_boxes() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Point3> = (0..100)
                .map(|_| Point3::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
                .collect();
            let v = convex_hull(&pts).unwrap().volume();
            let oracle = brute_force_volume(&pts);
            assert!(v <= 1000.0);
            assert!((v - oracle).abs() < 1e-6, "seed {seed}: {v} vs {oracle}");
        }
    }

    #[test]
    fn hull_faces_bound_every_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<Point3> = (0..500)
            .map(|_| {
                let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                Point3::from(v.normalize() * 30.0 + Vector3::new(100.0, -50.0, 20.0))
            })
            .collect();
        let h = convex_hull(&pts).unwrap();
        for f in h.faces() {
            let face = Face::new(&pts, *f);
            assert!(pts.iter().all(|p| face.distance(p) < 1e-6));
        }
        // Sphere of radius 30 sampled by 500 points: close to 4/3·π·30³.
        let sphere = 4.0 / 3.0 * std::f64::consts::PI * 27000.0;
        assert!(h.volume() < sphere && h.volume() > 0.9 * sphere);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(convex_hull(&[Point3::origin(); 10]).is_none());
        let line: Vec<Point3> = (0..10).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(convex_hull(&line).is_none());
    }
}
