//! Simulated wrist camera.
//!
//! The posed surface is sampled once per scene. A sample is visible when it
//! lies inside the field-of-view cone, its face points towards the camera and
//! the segment to the camera crosses no other surface. Finger occlusion is a
//! contiguous angular sector of the visible samples (measured around the view
//! axis) that is removed from every frame. Each frame then adds independent
//! isotropic Gaussian noise.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::raycast::RayMesh;
use super::rng_for;
use crate::error::{Error, Result};
use crate::geometry::{
    sample_surface_points, LabeledPointCloud, Modality, Point3, RigidTransform, SurfaceSample,
    TriMesh, Vector3, STANDARD_DENSITY,
};
use crate::preprocess::FrameSequence;

/// Visibility tolerance along the camera ray, in mm.
const VISIBILITY_TOLERANCE: f64 = 0.1;

const STREAM_SURFACE: u64 = 1;
const STREAM_SECTOR: u64 = 2;
const STREAM_FRAME_BASE: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub position: Point3,
    pub look_at: Point3,
    pub fov_deg: f64,
    pub noise_sigma: f64,
    pub frame_count: usize,
    pub dropout_fraction: f64,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self {
            position: Point3::new(0.0, 0.0, 250.0),
            look_at: Point3::origin(),
            fov_deg: 60.0,
            noise_sigma: 1.0,
            frame_count: 5,
            dropout_fraction: 0.0,
        }
    }
}

impl CameraSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return bad(format!("fov must be in (0, 180), got {}", self.fov_deg));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("camera noise sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.frame_count == 0 {
            return bad("frame count must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.dropout_fraction) {
            return bad(format!("dropout fraction must be in [0, 1], got {}", self.dropout_fraction));
        }
        if (self.look_at - self.position).norm() < 1e-9 {
            return bad("camera position and look-at point coincide".into());
        }
        Ok(())
    }

    fn view_dir(&self) -> Vector3 {
        (self.look_at - self.position).normalize()
    }
}

/// The object surface at its ground-truth pose, sampled at standard density.
pub struct PosedSurface {
    mesh: TriMesh,
    samples: Vec<SurfaceSample>,
    rays: RayMesh,
}

impl PosedSurface {
    pub fn new(model: &TriMesh, pose: &RigidTransform, seed: u64) -> Result<Self> {
        let mesh = model.transformed(pose);
        let sample_seed = rng_for(seed, STREAM_SURFACE).random();
        let samples = sample_surface_points(&mesh, STANDARD_DENSITY, sample_seed)?;
        let rays = RayMesh::new(&mesh);
        Ok(Self {
            mesh,
            samples,
            rays,
        })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    pub fn normal(&self, sample: usize) -> Vector3 {
        self.mesh.face_normal(self.samples[sample].face)
    }

    /// Noise-free surface cloud used as occlusion ground truth.
    pub fn cloud(&self) -> LabeledPointCloud {
        LabeledPointCloud::uniform(
            self.samples.iter().map(|s| s.point).collect(),
            Modality::Model,
            1.0,
        )
        .expect("surface samples are finite")
    }

    pub(crate) fn rays(&self) -> &RayMesh {
        &self.rays
    }
}

/// Samples the camera can see, ordered for sector dropout.
pub struct VisibleSurface<'a> {
    surface: &'a PosedSurface,
    camera: CameraSpec,
    /// Visible sample indices, ascending.
    visible: Vec<usize>,
    /// Positions into `visible`, sorted by angle around the view axis.
    angular: Vec<usize>,
    /// First position in `angular` removed by dropout.
    sector_start: usize,
}

impl<'a> VisibleSurface<'a> {
    pub fn new(surface: &'a PosedSurface, camera: &CameraSpec, seed: u64) -> Result<Self> {
        camera.validate()?;
        if surface.rays.contains(&camera.position) {
            return Err(Error::CameraInsideMesh);
        }
        let dir = camera.view_dir();
        let cos_half = (camera.fov_deg.to_radians() / 2.0).cos();
        let visible: Vec<usize> = (0..surface.samples.len())
            .filter(|&i| {
                let p = surface.samples[i].point;
                let to_cam = camera.position - p;
                let dist = to_cam.norm();
                if dist <= 0.0 || (-to_cam).dot(&dir) / dist < cos_half {
                    return false;
                }
                if surface.normal(i).dot(&to_cam) <= 0.0 {
                    return false;
                }
                let ray = -to_cam / dist;
                !surface
                    .rays
                    .hits_between(&camera.position, &ray, 0.0, dist - VISIBILITY_TOLERANCE)
            })
            .collect();

        let (u, v) = basis(&dir);
        let centroid = visible
            .iter()
            .fold(Vector3::zeros(), |acc, &i| acc + surface.samples[i].point.coords)
            / visible.len().max(1) as f64;
        let angles: Vec<f64> = visible
            .iter()
            .map(|&i| {
                let d = surface.samples[i].point.coords - centroid;
                d.dot(&v).atan2(d.dot(&u))
            })
            .collect();
        let mut angular: Vec<usize> = (0..visible.len()).collect();
        angular.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)));
        let start_angle = rng_for(seed, STREAM_SECTOR).random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let sector_start = angular
            .iter()
            .position(|&k| angles[k] >= start_angle)
            .unwrap_or(0);

        Ok(Self {
            surface,
            camera: camera.clone(),
            visible,
            angular,
            sector_start,
        })
    }

    pub fn visible_count(&self) -> usize {
        self.visible.len()
    }

    pub fn visible_indices(&self) -> &[usize] {
        &self.visible
    }

    /// Number of samples removed for a dropout fraction.
    pub fn dropped_for(&self, fraction: f64) -> usize {
        ((fraction * self.visible.len() as f64).round() as usize).min(self.visible.len())
    }

    /// Per surface sample: whether it appears in the frames rendered with
    /// `dropped` samples removed.
    pub fn seen_mask(&self, dropped: usize) -> Vec<bool> {
        let n = self.visible.len();
        let mut seen = vec![false; self.surface.samples.len()];
        for &i in &self.visible {
            seen[i] = true;
        }
        for s in 0..dropped.min(n) {
            seen[self.visible[self.angular[(self.sector_start + s) % n]]] = false;
        }
        seen
    }

    /// Renders all frames with `dropped` samples removed from the occluded
    /// sector. Noise depends only on the seed and frame index, so removing
    /// more samples yields a subset of the points of a smaller dropout.
    pub fn frames(&self, dropped: usize, seed: u64) -> Result<FrameSequence> {
        let n = self.visible.len();
        let mut keep = vec![true; n];
        for s in 0..dropped.min(n) {
            keep[self.angular[(self.sector_start + s) % n]] = false;
        }
        let sigma = self.camera.noise_sigma;
        let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let frames = (0..self.camera.frame_count)
            .map(|f| {
                let mut rng = rng_for(seed, STREAM_FRAME_BASE + f as u64);
                let mut points = Vec::with_capacity(n);
                for (k, &i) in self.visible.iter().enumerate() {
                    let noise = if sigma > 0.0 {
                        Vector3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng))
                    } else {
                        Vector3::zeros()
                    };
                    if keep[k] {
                        points.push(self.surface.samples[i].point + noise);
                    }
                }
                LabeledPointCloud::uniform(points, Modality::Vision, 1.0)
            })
            .collect::<Result<Vec<_>>>()?;
        FrameSequence::new(frames)
    }
}

/// Orthonormal pair spanning the plane perpendicular to `dir`.
fn basis(dir: &Vector3) -> (Vector3, Vector3) {
    let helper = if dir.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = dir.cross(&helper).normalize();
    let v = dir.cross(&u);
    (u, v)
}

/// Renders the vision frames of `mesh` at `gt_pose`.
pub fn render_vision(mesh: &TriMesh, gt_pose: &RigidTransform, cam: &CameraSpec, seed: u64) -> Result<FrameSequence> {
    let surface = PosedSurface::new(mesh, gt_pose, seed)?;
    let view = VisibleSurface::new(&surface, cam, seed)?;
    view.frames(view.dropped_for(cam.dropout_fraction), seed)
}
