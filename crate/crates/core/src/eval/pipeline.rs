use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::errors::{ErrorModel, PoseErrors};
use crate::error::{Error, Result};
use crate::fusion::{cloud_metrics, dynamic_weight, fuse, AffineWeightModel, WeightPolicy, DEFAULT_CAPTURE_RADIUS};
use crate::geometry::{sample_mesh_surface, KdTree, LabeledPointCloud, Point3, RigidTransform, TriMesh, Vector3, STANDARD_DENSITY};
use crate::preprocess::{preprocess_tactile, preprocess_vision, PreprocessParams};
use crate::registration::{multi_start_runs, select_best, IcpParams, RegistrationResult};
use crate::synth::GraspScene;

/// Which sensor clouds feed the registration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "vis")]
    Vision,
    #[serde(rename = "vis+tac")]
    VisionTactile,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Vision, Condition::VisionTactile];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Vision => "vis",
            Condition::VisionTactile => "vis+tac",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vis" | "vision" => Ok(Condition::Vision),
            "vis+tac" | "vistac" | "vision+tactile" => Ok(Condition::VisionTactile),
            _ => Err(Error::InvalidParameter(format!("unknown condition `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub preprocess: PreprocessParams,
    pub icp: IcpParams,
    /// Seed of the model cloud used as the registration target.
    pub model_seed: u64,
    /// Model-frame axis of a continuous symmetry, for symmetry-aware
    /// rotation errors.
    pub symmetry_axis: Option<Vector3>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessParams::default(),
            icp: IcpParams::default(),
            model_seed: 7,
            symmetry_axis: None,
        }
    }
}

/// Registration target and error model of one object.
pub struct ModelTarget {
    tree: KdTree,
    centroid: Point3,
    errors: ErrorModel,
}

impl ModelTarget {
    pub fn new(mesh: &TriMesh, config: &PipelineConfig) -> Result<Self> {
        let cloud = sample_mesh_surface(mesh, STANDARD_DENSITY, config.model_seed)?;
        let centroid = Point3::from(
            cloud.points().iter().fold(Vector3::zeros(), |a, p| a + p.coords) / cloud.len() as f64,
        );
        Ok(Self {
            tree: KdTree::new(cloud.points()),
            centroid,
            errors: ErrorModel::new(mesh)?.with_symmetry_axis(config.symmetry_axis),
        })
    }

    /// Nearest-neighbour index over the model cloud.
    pub fn tree(&self) -> &KdTree {
        &self.tree
    }

    /// Mean of the model cloud.
    pub fn centroid(&self) -> &Point3 {
        &self.centroid
    }

    pub fn errors(&self, estimate: &RigidTransform, ground_truth: &RigidTransform) -> PoseErrors {
        self.errors.errors(estimate, ground_truth)
    }
}

/// How the tactile weight is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    Fixed(WeightPolicy),
    /// Tactile weight from cloud metrics; vision weight stays at 1.
    Dynamic(AffineWeightModel),
}

#[derive(Debug, Clone)]
pub struct Estimate {
    /// Model-to-world pose.
    pub pose: RigidTransform,
    pub policy: WeightPolicy,
    pub registration: RegistrationResult,
    /// RMSE histories of every start that ran to completion.
    pub start_histories: Vec<Vec<f64>>,
    pub source_points: usize,
}

/// Preprocesses, weights and fuses the scene's sensor clouds for `condition`.
pub fn sensor_cloud(
    scene: &GraspScene,
    condition: Condition,
    weighting: &Weighting,
    params: &PreprocessParams,
) -> Result<(LabeledPointCloud, WeightPolicy)> {
    let vision = preprocess_vision(&scene.vision_frames, params)?;
    let tactile = match condition {
        Condition::Vision => LabeledPointCloud::empty(),
        Condition::VisionTactile => preprocess_tactile(&scene.tactile_cloud, params)?,
    };
    let policy = match weighting {
        Weighting::Fixed(p) => *p,
        Weighting::Dynamic(model) => {
            let mv = cloud_metrics(&vision, Some(&scene.vision_frames), &scene.gt_surface, DEFAULT_CAPTURE_RADIUS)?;
            let mt = cloud_metrics(&tactile, None, &scene.gt_surface, DEFAULT_CAPTURE_RADIUS)?;
            dynamic_weight(&mv, &mt, model)?
        }
    };
    Ok((fuse(&vision, &tactile, &policy)?, policy))
}

/// Full pipeline on one scene: preprocessing, fusion, multi-start registration.
pub fn estimate_pose(
    scene: &GraspScene,
    condition: Condition,
    weighting: &Weighting,
    config: &PipelineConfig,
    target: &ModelTarget,
) -> Result<Estimate> {
    let (source, policy) = sensor_cloud(scene, condition, weighting, &config.preprocess)?;
    let runs = multi_start_runs(&source, &target.tree, &target.centroid, &config.icp)?;
    let start_histories = runs
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|r| r.rmse_history.clone()))
        .collect();
    let registration = select_best(runs)?;
    Ok(Estimate {
        pose: registration.transform.inverse(),
        policy,
        registration,
        start_histories,
        source_points: source.len(),
    })
}

/// One row of the per-trial table. Error columns are empty when the
/// pipeline failed on the trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub scene_id: String,
    pub condition: Condition,
    pub vision_weight: f64,
    pub tactile_weight: Option<f64>,
    pub occlusion: f64,
    pub translation_error_mm: Option<f64>,
    pub rotation_error_deg: Option<f64>,
    pub object_error_mm: Option<f64>,
    pub success: bool,
    pub iterations: Option<usize>,
    pub init_index: Option<usize>,
    pub runtime_s: f64,
    #[serde(skip)]
    pub error: Option<String>,
    #[serde(skip)]
    pub rmse_histories: Vec<Vec<f64>>,
}

impl TrialRecord {
    pub fn errors(&self) -> Option<PoseErrors> {
        Some(PoseErrors {
            translation_mm: self.translation_error_mm?,
            rotation_deg: self.rotation_error_deg?,
            object_mm: self.object_error_mm?,
        })
    }
}

/// Runs the pipeline and scores it against the scene's ground truth. A
/// pipeline error is recorded on the trial rather than returned.
pub fn run_trial(
    scene: &GraspScene,
    condition: Condition,
    weighting: &Weighting,
    config: &PipelineConfig,
    target: &ModelTarget,
) -> TrialRecord {
    let start = Instant::now();
    let outcome = estimate_pose(scene, condition, weighting, config, target);
    let runtime_s = start.elapsed().as_secs_f64();
    let nominal = match weighting {
        Weighting::Fixed(p) => Some(*p),
        Weighting::Dynamic(_) => None,
    };
    let mut record = TrialRecord {
        scene_id: scene.id.clone(),
        condition,
        vision_weight: nominal.map_or(1.0, |p| p.vision_weight()),
        tactile_weight: None,
        occlusion: scene.metadata.occlusion,
        translation_error_mm: None,
        rotation_error_deg: None,
        object_error_mm: None,
        success: false,
        iterations: None,
        init_index: None,
        runtime_s,
        error: None,
        rmse_histories: Vec::new(),
    };
    match outcome {
        Ok(est) => {
            let e = target.errors(&est.pose, &scene.gt_pose);
            record.vision_weight = est.policy.vision_weight();
            if condition == Condition::VisionTactile {
                record.tactile_weight = Some(est.policy.tactile_weight());
            }
            record.translation_error_mm = Some(e.translation_mm);
            record.rotation_error_deg = Some(e.rotation_deg);
            record.object_error_mm = Some(e.object_mm);
            record.success = e.success();
            record.iterations = Some(est.registration.iterations);
            record.init_index = Some(est.registration.init_index);
            record.rmse_histories = est.start_histories;
        }
        Err(err) => {
            log::warn!("scene {} ({condition}): {err}", scene.id);
            if condition == Condition::VisionTactile {
                record.tactile_weight = nominal.map(|p| p.tactile_weight());
            }
            record.error = Some(err.to_string());
        }
    }
    record
}
