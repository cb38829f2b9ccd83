//! Area-weighted barycentric surface sampling at a target voxel density.
//!
//! The mesh is oversampled and then thinned to one sample per occupied voxel.
//! Thinning keeps an actual sample (the one closest to the voxel's mean), so
//! every returned point lies exactly on a face.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dist2, LabeledPointCloud, Modality, Point3, TriMesh, Vector3};
use crate::error::{Error, Result};

/// One point per mm³.
pub const STANDARD_DENSITY: f64 = 1.0;

/// Raw samples drawn per voxel-face area before thinning.
const OVERSAMPLE: f64 = 8.0;

/// A surface sample and the face it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: Point3,
    pub face: usize,
}

/// Edge length of the cubic voxel holding one point at `density` points/mm³.
pub fn voxel_edge_for_density(density: f64) -> f64 {
    density.powf(-1.0 / 3.0)
}

#[inline]
pub fn voxel_key(p: &Point3, edge: f64) -> [i64; 3] {
    [
        (p.x / edge).floor() as i64,
        (p.y / edge).floor() as i64,
        (p.z / edge).floor() as i64,
    ]
}

/// Samples `mesh` and thins to one sample per voxel of the density's edge,
/// returned in voxel-key order. Deterministic for a fixed seed.
pub fn sample_surface_points(mesh: &TriMesh, density: f64, seed: u64) -> Result<Vec<SurfaceSample>> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::InvalidParameter(format!("density must be > 0, got {density}")));
    }
    let areas: Vec<f64> = (0..mesh.faces().len()).map(|f| mesh.face_area(f)).collect();
    let total: f64 = areas.iter().sum();
    if mesh.faces().is_empty() || total <= 0.0 {
        return Err(Error::EmptyMesh);
    }
    let edge = voxel_edge_for_density(density);
    let count = ((total / (edge * edge)) * OVERSAMPLE).ceil().max(1.0) as usize;
    let chooser = WeightedIndex::new(&areas).map_err(|_| Error::EmptyMesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let raw: Vec<SurfaceSample> = (0..count)
        .map(|_| {
            let face = chooser.sample(&mut rng);
            let [a, b, c] = mesh.triangle(face);
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let s = r1.sqrt();
            let (u, v, w) = (1.0 - s, s * (1.0 - r2), s * r2);
            SurfaceSample {
                point: Point3::from(a.coords * u + b.coords * v + c.coords * w),
                face,
            }
        })
        .collect();
    Ok(thin_to_voxels(&raw, edge))
}

/// One representative per voxel: the member closest to the voxel mean, ties to
/// the earliest member.
fn thin_to_voxels(raw: &[SurfaceSample], edge: f64) -> Vec<SurfaceSample> {
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, s) in raw.iter().enumerate() {
        buckets.entry(voxel_key(&s.point, edge)).or_default().push(i);
    }
    let mut keys: Vec<[i64; 3]> = buckets.keys().copied().collect();
    keys.sort_unstable();
    keys.into_iter()
        .map(|k| {
            let members = &buckets[&k];
            let mean = members
                .iter()
                .fold(Vector3::zeros(), |acc, &i| acc + raw[i].point.coords)
                / members.len() as f64;
            let mean = Point3::from(mean);
            let best = members
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    dist2(&raw[a].point, &mean)
                        .total_cmp(&dist2(&raw[b].point, &mean))
                        .then(a.cmp(&b))
                })
                .unwrap_or(members[0]);
            raw[best]
        })
        .collect()
}

/// Model-labelled, unit-weight cloud sampled from the mesh surface with at
/// most one point per voxel.
pub fn sample_mesh_surface(mesh: &TriMesh, density: f64, seed: u64) -> Result<LabeledPointCloud> {
    let samples = sample_surface_points(mesh, density, seed)?;
    LabeledPointCloud::uniform(
        samples.into_iter().map(|s| s.point).collect(),
        Modality::Model,
        1.0,
    )
}
