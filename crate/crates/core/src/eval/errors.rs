//! Pose and object errors, and the success rule.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{directed_hausdorff, sample_surface_points, KdTree, Point3, RigidTransform, TriMesh, Vector3, STANDARD_DENSITY};

/// Success thresholds; both comparisons are strict.
pub const SUCCESS_TRANSLATION_MM: f64 = 15.0;
pub const SUCCESS_ROTATION_DEG: f64 = 15.0;

/// Seed of the model sample used for object errors.
const OBJECT_SAMPLE_SEED: u64 = 0x000b_1ec7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseErrors {
    pub translation_mm: f64,
    pub rotation_deg: f64,
    pub object_mm: f64,
}

impl PoseErrors {
    pub fn success(&self) -> bool {
        classify_success(self.translation_mm, self.rotation_deg)
    }
}

pub fn classify_success(translation_mm: f64, rotation_deg: f64) -> bool {
    translation_mm < SUCCESS_TRANSLATION_MM && rotation_deg < SUCCESS_ROTATION_DEG
}

/// Geodesic angle of `R_aᵀ R_b` in degrees, in `[0, 180]`.
pub fn rotation_error_deg(a: &RigidTransform, b: &RigidTransform) -> f64 {
    a.rotation_angle_to_deg(b)
}

/// Rotation error modulo a continuous symmetry about the model-frame `axis`:
/// the angle between the axis as placed by each pose.
pub fn symmetric_rotation_error_deg(a: &RigidTransform, b: &RigidTransform, axis: &Vector3) -> f64 {
    let ua = a.transform_vector(axis).normalize();
    let ub = b.transform_vector(axis).normalize();
    ua.cross(&ub).norm().atan2(ua.dot(&ub)).to_degrees()
}

/// Precomputed model sample and centroid for repeated error evaluation.
#[derive(Debug, Clone)]
pub struct ErrorModel {
    centroid: Point3,
    sample: Vec<Point3>,
    symmetry_axis: Option<Vector3>,
}

impl ErrorModel {
    pub fn new(mesh: &TriMesh) -> Result<Self> {
        let sample = sample_surface_points(mesh, STANDARD_DENSITY, OBJECT_SAMPLE_SEED)?
            .into_iter()
            .map(|s| s.point)
            .collect();
        Ok(Self {
            centroid: mesh.centroid(),
            sample,
            symmetry_axis: None,
        })
    }

    /// Measures rotation modulo rotations about `axis` (model frame).
    pub fn with_symmetry_axis(mut self, axis: Option<Vector3>) -> Self {
        self.symmetry_axis = axis;
        self
    }

    pub fn errors(&self, estimate: &RigidTransform, ground_truth: &RigidTransform) -> PoseErrors {
        let translation_mm = (estimate.transform_point(&self.centroid)
            - ground_truth.transform_point(&self.centroid))
        .norm();
        let rotation_deg = match &self.symmetry_axis {
            Some(axis) => symmetric_rotation_error_deg(estimate, ground_truth, axis),
            None => ground_truth.rotation_angle_to_deg(estimate),
        };
        let at = |t: &RigidTransform| -> Vec<Point3> { self.sample.iter().map(|p| t.transform_point(p)).collect() };
        let (a, b) = (at(ground_truth), at(estimate));
        let object_mm = directed_hausdorff(&a, &KdTree::new(&b)).max(directed_hausdorff(&b, &KdTree::new(&a)));
        PoseErrors {
            translation_mm,
            rotation_deg,
            object_mm,
        }
    }
}

/// Translation error at the mesh centroid, geodesic rotation error, and the
/// Hausdorff distance between the model surface placed by each pose.
pub fn pose_errors(estimate: &RigidTransform, ground_truth: &RigidTransform, mesh: &TriMesh) -> Result<PoseErrors> {
    Ok(ErrorModel::new(mesh)?.errors(estimate, ground_truth))
}
