use nalgebra::{Quaternion, UnitQuaternion};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng_for;
use super::shapes::{generate_shape, ShapeSpec};
use super::tactile::{antipodal_contacts_among, tactile_patches, TactileSpec};
use super::vision::{CameraSpec, PosedSurface, VisibleSurface};
use crate::error::{Error, Result};
use crate::fusion::{occlusion_metric, DEFAULT_CAPTURE_RADIUS};
use crate::geometry::{LabeledPointCloud, Matrix3, Point3, RigidTransform, TriMesh, Vector3};
use crate::preprocess::FrameSequence;

const STREAM_POSE: u64 = 5;

/// Distribution of ground-truth object poses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoseSampler {
    /// Uniform rotation over SO(3); translation uniform in the cube
    /// `[-translation_range, translation_range]³`.
    Uniform { translation_range: f64 },
    Fixed { pose: RigidTransform },
}

impl Default for PoseSampler {
    fn default() -> Self {
        PoseSampler::Uniform {
            translation_range: 50.0,
        }
    }
}

impl PoseSampler {
    fn draw(&self, seed: u64) -> Result<RigidTransform> {
        match self {
            PoseSampler::Fixed { pose } => Ok(*pose),
            PoseSampler::Uniform { translation_range } => {
                let r = *translation_range;
                if !(r.is_finite() && r >= 0.0) {
                    return Err(Error::InvalidParameter(format!("translation range must be >= 0, got {r}")));
                }
                let mut rng = rng_for(seed, STREAM_POSE);
                let rotation = random_rotation(&mut rng);
                let t = if r > 0.0 {
                    Vector3::from_fn(|_, _| rng.random_range(-r..=r))
                } else {
                    Vector3::zeros()
                };
                Ok(RigidTransform::from_rotation_projected(rotation, t))
            }
        }
    }
}

/// Uniformly distributed rotation (normalised Gaussian quaternion).
pub fn random_rotation(rng: &mut impl Rng) -> Matrix3 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let q = Quaternion::new(q[0], q[1], q[2], q[3]);
        if q.norm() > 1e-6 {
            return *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix();
        }
    }
}

/// Where the fingertips touch the object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContactPlacement {
    /// A parallel-gripper grasp chosen from the seed. The first contact lies
    /// on surface missing from the vision frames.
    Antipodal,
    /// Explicit world-frame contact points.
    Points { points: Vec<Point3> },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TactileConfig {
    pub contacts: ContactPlacement,
    pub patch_radius: f64,
    pub noise_sigma: f64,
}

impl Default for TactileConfig {
    fn default() -> Self {
        Self {
            contacts: ContactPlacement::Antipodal,
            patch_radius: 8.0,
            noise_sigma: 0.1,
        }
    }
}

/// Everything needed to generate a scene besides its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub shape: ShapeSpec,
    pub pose: PoseSampler,
    pub camera: CameraSpec,
    pub tactile: TactileConfig,
    /// When set, the dropout fraction is chosen so that the measured
    /// occlusion is as close as possible to this value.
    #[serde(default)]
    pub target_occlusion: Option<f64>,
}

impl SceneSpec {
    pub fn new(shape: ShapeSpec) -> Self {
        Self {
            shape,
            pose: PoseSampler::default(),
            camera: CameraSpec::default(),
            tactile: TactileConfig::default(),
            target_occlusion: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMetadata {
    /// Fraction of the ground-truth surface missed by all vision frames.
    pub occlusion: f64,
    /// Dropout fraction actually applied.
    pub dropout_fraction: f64,
    pub visible_points: usize,
    pub contact_points: Vec<Point3>,
}

#[derive(Debug, Clone)]
pub struct GraspScene {
    pub id: String,
    pub spec: SceneSpec,
    pub seed: u64,
    pub mesh: TriMesh,
    pub gt_pose: RigidTransform,
    pub vision_frames: FrameSequence,
    pub tactile_cloud: LabeledPointCloud,
    pub gt_surface: LabeledPointCloud,
    pub metadata: SceneMetadata,
}

/// Builds a complete scene. A pure function of `(spec, seed)`.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<GraspScene> {
    spec.camera.validate()?;
    if let Some(t) = spec.target_occlusion {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("target occlusion must be in [0, 1], got {t}")));
        }
    }
    let mesh = generate_shape(&spec.shape)?;
    let gt_pose = spec.pose.draw(seed)?;
    let surface = PosedSurface::new(&mesh, &gt_pose, seed)?;
    let view = VisibleSurface::new(&surface, &spec.camera, seed)?;
    let gt_surface = surface.cloud();

    let occlusion_for = |dropped: usize| -> Result<(FrameSequence, f64)> {
        let frames = view.frames(dropped, seed)?;
        let occ = occlusion_metric(&frames.concatenated(), &gt_surface, DEFAULT_CAPTURE_RADIUS)?;
        Ok((frames, occ))
    };
    let dropped = match spec.target_occlusion {
        None => view.dropped_for(spec.camera.dropout_fraction),
        Some(target) => calibrate_dropout(view.visible_count(), target, |m| Ok(occlusion_for(m)?.1))?,
    };
    let (vision_frames, occlusion) = occlusion_for(dropped)?;

    let contact_points = match &spec.tactile.contacts {
        ContactPlacement::Antipodal => {
            let seen = view.seen_mask(dropped);
            antipodal_contacts_among(&surface, seed, |i| !seen[i])
        }
        ContactPlacement::Points { points } => points.clone(),
        ContactPlacement::None => Vec::new(),
    };
    let tactile_spec = TactileSpec {
        contact_points: contact_points.clone(),
        patch_radius: spec.tactile.patch_radius,
        noise_sigma: spec.tactile.noise_sigma,
    };
    let tactile_cloud = tactile_patches(&surface, &tactile_spec, seed)?;

    let visible = view.visible_count();
    let dropout_fraction = if visible == 0 { 0.0 } else { dropped as f64 / visible as f64 };
    let mut resolved = spec.clone();
    resolved.camera.dropout_fraction = dropout_fraction;
    Ok(GraspScene {
        id: format!("{seed:06}-{}", spec.shape.name()),
        spec: resolved,
        seed,
        mesh,
        gt_pose,
        vision_frames,
        tactile_cloud,
        gt_surface,
        metadata: SceneMetadata {
            occlusion,
            dropout_fraction,
            visible_points: visible,
            contact_points,
        },
    })
}

/// Number of dropped samples whose occlusion is closest to `target`, given
/// that occlusion never decreases as more samples are dropped.
fn calibrate_dropout(visible: usize, target: f64, occlusion: impl Fn(usize) -> Result<f64>) -> Result<usize> {
    let (mut lo, mut hi) = (0usize, visible);
    if occlusion(0)? >= target {
        return Ok(0);
    }
    // Invariant: occlusion(lo) < target <= occlusion(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if occlusion(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let below = target - occlusion(lo)?;
    let above = occlusion(hi)? - target;
    Ok(if below < above { lo } else { hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_rotations_are_proper() {
        let mut rng = rng_for(1, 0);
        for _ in 0..100 {
            let r = random_rotation(&mut rng);
            assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_rotation_axes_are_spread() {
        // Mean of R·e_z over uniform rotations tends to zero.
        let mut rng = rng_for(2, 0);
        let n = 4000;
        let mean = (0..n).fold(Vector3::zeros(), |acc, _| acc + random_rotation(&mut rng) * Vector3::z()) / n as f64;
        assert!(mean.norm() < 0.05, "{mean}");
    }

    #[test]
    fn calibration_finds_closest_step() {
        let table = [0.4, 0.5, 0.6, 0.7, 0.8, 1.0];
        let f = |m: usize| Ok(table[m]);
        assert_eq!(calibrate_dropout(5, 0.62, f).unwrap(), 2);
        assert_eq!(calibrate_dropout(5, 0.68, f).unwrap(), 3);
        assert_eq!(calibrate_dropout(5, 0.1, f).unwrap(), 0);
        assert_eq!(calibrate_dropout(5, 0.95, f).unwrap(), 5);
    }

    #[test]
    fn dropout_sweep_raises_occlusion() {
        let mut spec = SceneSpec::new(ShapeSpec::handle());
        let mut last = -1.0;
        for f in [0.0, 0.25, 0.5, 0.75] {
            spec.camera.dropout_fraction = f;
            let s = generate_scene(&spec, 11).unwrap();
            assert!(s.metadata.occlusion > last, "{f}: {}", s.metadata.occlusion);
            last = s.metadata.occlusion;
        }
    }

    #[test]
    fn target_occlusion_is_met() {
        let mut spec = SceneSpec::new(ShapeSpec::knob());
        spec.target_occlusion = Some(0.8);
        let s = generate_scene(&spec, 3).unwrap();
        assert!((s.metadata.occlusion - 0.8).abs() < 0.02, "{}", s.metadata.occlusion);
    }

    #[test]
    fn tactile_points_stay_near_the_surface() {
        let spec = SceneSpec::new(ShapeSpec::sl_block());
        let s = generate_scene(&spec, 21).unwrap();
        let posed = s.mesh.transformed(&s.gt_pose);
        assert!(!s.tactile_cloud.is_empty());
        let bound = spec.tactile.patch_radius + 3.0 * spec.tactile.noise_sigma;
        for p in s.tactile_cloud.points() {
            assert!(posed.distance_to_surface(p) <= bound);
        }
    }

    #[test]
    fn noiseless_points_lie_on_the_posed_surface() {
        let mut spec = SceneSpec::new(ShapeSpec::knob());
        spec.camera.noise_sigma = 0.0;
        spec.tactile.noise_sigma = 0.0;
        let s = generate_scene(&spec, 5).unwrap();
        let posed = s.mesh.transformed(&s.gt_pose);
        for p in s.vision_frames.concatenated().points().iter().chain(s.tactile_cloud.points()) {
            assert!(posed.distance_to_surface(p) < 1e-6);
        }
    }
}
