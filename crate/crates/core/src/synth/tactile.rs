//! Simulated fingertip sensors: each contact yields the patch of surface
//! samples around it, seen from the contact side.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rng_for;
use super::vision::PosedSurface;
use crate::error::{Error, Result};
use crate::geometry::{KdTree, LabeledPointCloud, Modality, Point3, RigidTransform, TriMesh, Vector3};

/// Contact points must lie this close to the surface, in mm.
pub const CONTACT_TOLERANCE: f64 = 1.0;

const STREAM_NOISE: u64 = 3;
const STREAM_CONTACTS: u64 = 4;
const CONTACT_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TactileSpec {
    pub contact_points: Vec<Point3>,
    pub patch_radius: f64,
    pub noise_sigma: f64,
}

impl TactileSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.patch_radius.is_finite() && self.patch_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "patch radius must be > 0, got {}",
                self.patch_radius
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tactile noise sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Tactile cloud for contacts on `mesh` at `gt_pose` (contacts in world frame).
pub fn sample_tactile(mesh: &TriMesh, gt_pose: &RigidTransform, spec: &TactileSpec, seed: u64) -> Result<LabeledPointCloud> {
    let surface = PosedSurface::new(mesh, gt_pose, seed)?;
    tactile_patches(&surface, spec, seed)
}

pub(crate) fn tactile_patches(surface: &PosedSurface, spec: &TactileSpec, seed: u64) -> Result<LabeledPointCloud> {
    spec.validate()?;
    for (index, c) in spec.contact_points.iter().enumerate() {
        let distance = surface.mesh().distance_to_surface(c);
        if distance > CONTACT_TOLERANCE {
            return Err(Error::ContactOffSurface { index, distance });
        }
    }
    if spec.contact_points.is_empty() {
        return Ok(LabeledPointCloud::empty());
    }
    let points: Vec<Point3> = surface.samples().iter().map(|s| s.point).collect();
    let tree = KdTree::new(&points);
    let normal = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = rng_for(seed, STREAM_NOISE);
    let mut out = Vec::new();
    for c in &spec.contact_points {
        let Some((nearest, _)) = tree.nearest(c) else {
            continue;
        };
        let contact_normal = surface.normal(nearest);
        for i in tree.within_radius(c, spec.patch_radius) {
            if surface.normal(i).dot(&contact_normal) <= 0.0 {
                continue;
            }
            let noise = if spec.noise_sigma > 0.0 {
                Vector3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng))
            } else {
                Vector3::zeros()
            };
            out.push(points[i] + noise);
        }
    }
    LabeledPointCloud::uniform(out, Modality::Tactile, 1.0)
}

/// Two opposing contacts, as a parallel gripper would make: a random surface
/// sample and the point where the inward normal ray leaves the object.
/// Prefers pairs whose normals are close to anti-parallel.
pub fn antipodal_contacts(surface: &PosedSurface, seed: u64) -> Vec<Point3> {
    antipodal_contacts_among(surface, seed, |_| true)
}

/// Like [`antipodal_contacts`], with the first contact drawn from the
/// samples accepted by `allowed` (from all samples when none is).
pub(crate) fn antipodal_contacts_among(
    surface: &PosedSurface,
    seed: u64,
    allowed: impl Fn(usize) -> bool,
) -> Vec<Point3> {
    let mut candidates: Vec<usize> = (0..surface.samples().len()).filter(|&i| allowed(i)).collect();
    if candidates.is_empty() {
        candidates = (0..surface.samples().len()).collect();
    }
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut rng = rng_for(seed, STREAM_CONTACTS);
    let mut best: Option<(f64, [Point3; 2])> = None;
    for _ in 0..CONTACT_ATTEMPTS {
        let i = candidates[rng.random_range(0..candidates.len())];
        let p = surface.samples()[i].point;
        let normal = surface.normal(i);
        let Some((t, face)) = surface.rays().first_hit(&p, &(-normal), 1e-6) else {
            continue;
        };
        let q = p - normal * t;
        let alignment = surface.mesh().face_normal(face).dot(&normal);
        if best.as_ref().is_none_or(|(a, _)| alignment < *a) {
            best = Some((alignment, [p, q]));
        }
        if alignment < -0.95 {
            break;
        }
    }
    best.map(|(_, pair)| pair.to_vec()).unwrap_or_default()
}
