//! Named scenes and the benchmark suite.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng_for;
use super::scene::{generate_scene, ContactPlacement, GraspScene, PoseSampler, SceneSpec, TactileConfig};
use super::shapes::ShapeSpec;
use super::vision::CameraSpec;
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vector3};

const STREAM_TARGET: u64 = 6;

/// Tool angles of the insertion presets and the occlusion each one targets.
const INSERTION_OCCLUSION: [(i32, f64); 11] = [
    (0, 0.80),
    (-5, 0.82),
    (-10, 0.85),
    (-15, 0.86),
    (-20, 0.86),
    (-25, 0.88),
    (-30, 0.89),
    (-35, 0.93),
    (-40, 0.98),
    (-45, 0.98),
    (-50, 0.98),
];

pub const PRESET_NAMES: [&str; 3] = ["insertion-<angle>deg", "flip180", "occ98"];

pub fn insertion_angles() -> Vec<i32> {
    INSERTION_OCCLUSION.iter().map(|(a, _)| *a).collect()
}

/// Screwdriver held across the gripper and tilted by the tool angle, seen by
/// the default camera.
fn insertion(angle: i32, occlusion: f64) -> SceneSpec {
    let tilt = RigidTransform::from_axis_angle(Vector3::y(), 90.0 + angle as f64, Vector3::new(0.0, 0.0, 10.0));
    let roll = RigidTransform::from_axis_angle(Vector3::z(), 30.0, Vector3::zeros());
    SceneSpec {
        shape: ShapeSpec::screwdriver(),
        pose: PoseSampler::Fixed {
            pose: tilt.compose(&roll),
        },
        camera: CameraSpec::default(),
        tactile: TactileConfig::default(),
        target_occlusion: Some(occlusion),
    }
}

/// Resolves a named preset into its spec and seed.
///
/// * `insertion-<angle>deg` for tool angles 0, -5, ..., -50 (the sign may be
///   omitted).
/// * `flip180`: an SL-block turned half a revolution about the camera axis,
///   barely occluded.
/// * `occ98`: a handle scene with 98% occlusion where vision alone fails
///   and the tactile patches recover the pose.
pub fn preset(name: &str) -> Result<(SceneSpec, u64)> {
    if let Some(angle) = name
        .strip_prefix("insertion-")
        .and_then(|s| s.strip_suffix("deg"))
    {
        let angle: i32 = angle
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad insertion angle in `{name}`")))?;
        let angle = -angle.abs();
        let (_, occ) = INSERTION_OCCLUSION
            .iter()
            .find(|(a, _)| *a == angle)
            .ok_or_else(|| Error::InvalidParameter(format!("no insertion preset for {angle} degrees")))?;
        return Ok((insertion(angle, *occ), 1000 + angle.unsigned_abs() as u64));
    }
    match name {
        "flip180" => {
            let mut spec = SceneSpec::new(ShapeSpec::sl_block());
            spec.pose = PoseSampler::Fixed {
                pose: RigidTransform::from_axis_angle(Vector3::z(), 180.0, Vector3::new(4.0, -3.0, 2.0)),
            };
            Ok((spec, 180))
        }
        "occ98" => {
            let mut spec = SceneSpec::new(ShapeSpec::handle());
            spec.target_occlusion = Some(0.98);
            Ok((spec, 105))
        }
        _ => Err(Error::InvalidParameter(format!(
            "unknown preset `{name}` (expected one of {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Parameters of a generated benchmark suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub count: usize,
    pub seed: u64,
    pub shapes: Vec<ShapeSpec>,
    /// Target occlusions are stratified over this interval.
    pub occlusion_range: (f64, f64),
    pub camera: CameraSpec,
    pub tactile: TactileConfig,
    pub pose: PoseSampler,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            count: 150,
            seed: 1,
            shapes: vec![ShapeSpec::knob(), ShapeSpec::handle(), ShapeSpec::sl_block()],
            occlusion_range: (0.4, 0.98),
            camera: CameraSpec::default(),
            tactile: TactileConfig {
                contacts: ContactPlacement::Antipodal,
                ..TactileConfig::default()
            },
            pose: PoseSampler::default(),
        }
    }
}

/// Scene specs and seeds of a suite. Scene `i` uses seed `seed + i`, cycles
/// through the shapes, and targets an occlusion drawn from the `i`-th of
/// `count` equal strata of the occlusion range.
pub fn benchmark_suite(config: &SuiteConfig) -> Result<Vec<(SceneSpec, u64)>> {
    let (lo, hi) = config.occlusion_range;
    if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
        return Err(Error::InvalidParameter(format!("bad occlusion range ({lo}, {hi})")));
    }
    if config.count > 0 && config.shapes.is_empty() {
        return Err(Error::InvalidParameter("benchmark suite needs at least one shape".into()));
    }
    Ok((0..config.count)
        .map(|i| {
            let seed = config.seed.wrapping_add(i as u64);
            let u: f64 = rng_for(seed, STREAM_TARGET).random();
            let target = lo + (hi - lo) * (i as f64 + u) / config.count as f64;
            let spec = SceneSpec {
                shape: config.shapes[i % config.shapes.len()].clone(),
                pose: config.pose.clone(),
                camera: config.camera.clone(),
                tactile: config.tactile.clone(),
                target_occlusion: Some(target),
            };
            (spec, seed)
        })
        .collect())
}

/// Generates every scene of a suite on the current rayon pool, in suite
/// order.
pub fn generate_suite(config: &SuiteConfig) -> Result<Vec<GraspScene>> {
    benchmark_suite(config)?
        .par_iter()
        .map(|(spec, seed)| generate_scene(spec, *seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_targets_are_stratified() {
        let cfg = SuiteConfig {
            count: 30,
            ..SuiteConfig::default()
        };
        let suite = benchmark_suite(&cfg).unwrap();
        assert_eq!(suite.len(), 30);
        for (i, (spec, seed)) in suite.iter().enumerate() {
            assert_eq!(*seed, 1 + i as u64);
            let t = spec.target_occlusion.unwrap();
            let width = 0.58 / 30.0;
            assert!(t >= 0.4 + width * i as f64 - 1e-12 && t <= 0.4 + width * (i + 1) as f64 + 1e-12);
        }
    }

    #[test]
    fn preset_names_resolve() {
        for a in insertion_angles() {
            assert!(preset(&format!("insertion-{a}deg")).is_ok());
        }
        assert_eq!(preset("insertion-5deg").unwrap(), preset("insertion--5deg").unwrap());
        assert!(preset("insertion-7deg").is_err());
        assert!(preset("flip180").is_ok());
        assert!(preset("nope").is_err());
    }
}
