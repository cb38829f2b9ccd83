//! Modality weighting, vision/tactile fusion, cloud metrics and the affine
//! dynamic-weighting hook.

mod hull;
mod metrics;

pub use hull::{convex_hull, ConvexHull};
pub use metrics::{
    cloud_metrics, noise_metric, occlusion_metric, volume_metric, CloudMetrics,
    DEFAULT_CAPTURE_RADIUS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LabeledPointCloud, Modality};

/// Lowest and highest tactile weight a dynamic policy may produce.
pub const TACTILE_WEIGHT_RANGE: (f64, f64) = (0.5, 50.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Fixed,
    Dynamic,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(WeightMode::Fixed),
            "dynamic" => Ok(WeightMode::Dynamic),
            _ => Err(Error::InvalidParameter(format!("unknown weight mode `{s}`"))),
        }
    }
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightMode::Fixed => "fixed",
            WeightMode::Dynamic => "dynamic",
        })
    }
}

/// Per-modality point weights. At least one weight is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPolicy {
    vision_weight: f64,
    tactile_weight: f64,
    mode: WeightMode,
}

impl WeightPolicy {
    pub fn new(vision_weight: f64, tactile_weight: f64, mode: WeightMode) -> Result<Self> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !ok(vision_weight) || !ok(tactile_weight) || vision_weight + tactile_weight <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "invalid weight policy ({vision_weight}, {tactile_weight})"
            )));
        }
        Ok(Self {
            vision_weight,
            tactile_weight,
            mode,
        })
    }

    pub fn fixed(vision_weight: f64, tactile_weight: f64) -> Result<Self> {
        Self::new(vision_weight, tactile_weight, WeightMode::Fixed)
    }

    pub fn vision_weight(&self) -> f64 {
        self.vision_weight
    }

    pub fn tactile_weight(&self) -> f64 {
        self.tactile_weight
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn weight_for(&self, label: Modality) -> Option<f64> {
        match label {
            Modality::Vision => Some(self.vision_weight),
            Modality::Tactile => Some(self.tactile_weight),
            Modality::Model => None,
        }
    }
}

impl Default for WeightPolicy {
    fn default() -> Self {
        Self {
            vision_weight: 1.0,
            tactile_weight: 1.0,
            mode: WeightMode::Fixed,
        }
    }
}

/// Overwrites each point's weight with its modality's policy weight.
pub fn assign_weights(cloud: &LabeledPointCloud, policy: &WeightPolicy) -> Result<LabeledPointCloud> {
    let weights = cloud
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| policy.weight_for(l).ok_or(Error::ModelLabelPresent(i)))
        .collect::<Result<Vec<f64>>>()?;
    cloud.with_weights(weights)
}

/// Vision points followed by tactile points, weighted by `policy`.
pub fn fuse(vision: &LabeledPointCloud, tactile: &LabeledPointCloud, policy: &WeightPolicy) -> Result<LabeledPointCloud> {
    if vision.is_empty() && tactile.is_empty() {
        return Err(Error::BothEmpty);
    }
    assign_weights(&vision.concat(tactile), policy)
}

/// Per-metric slopes of the affine weighting model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSlopes {
    pub occlusion: f64,
    pub noise: f64,
    pub point_count: f64,
    pub volume: f64,
}

impl MetricSlopes {
    fn apply(&self, m: &CloudMetrics) -> f64 {
        self.occlusion * m.occlusion
            + self.noise * m.noise
            + self.point_count * m.point_count as f64
            + self.volume * m.volume
    }
}

/// `tactile_weight = clamp(intercept + Σ slope·metric, 0.5, 50)`.
///
/// The default model (all zeros) is a placeholder: no reliable mapping from
/// metrics to weights is known, so callers supply their own coefficients.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AffineWeightModel {
    pub intercept: f64,
    pub vision: MetricSlopes,
    pub tactile: MetricSlopes,
}

pub fn dynamic_weight(
    metrics_vision: &CloudMetrics,
    metrics_tactile: &CloudMetrics,
    model: &AffineWeightModel,
) -> Result<WeightPolicy> {
    let raw = model.intercept + model.vision.apply(metrics_vision) + model.tactile.apply(metrics_tactile);
    if !raw.is_finite() {
        return Err(Error::InvalidParameter("dynamic weight is not finite".into()));
    }
    let (lo, hi) = TACTILE_WEIGHT_RANGE;
    WeightPolicy::new(1.0, raw.clamp(lo, hi), WeightMode::Dynamic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::preprocess::segment_modality;

    fn mixed() -> (LabeledPointCloud, LabeledPointCloud) {
        let v = LabeledPointCloud::uniform(
            (0..3).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect(),
            Modality::Vision,
            1.0,
        )
        .unwrap();
        let t = LabeledPointCloud::uniform(
            (0..2).map(|i| Point3::new(0.0, i as f64, 5.0)).collect(),
            Modality::Tactile,
            1.0,
        )
        .unwrap();
        (v, t)
    }

    #[test]
    fn assign_weight_policies() {
        let (v, t) = mixed();
        let c = v.concat(&t);
        let w = assign_weights(&c, &WeightPolicy::fixed(1.0, 1.0).unwrap()).unwrap();
        assert!(w.weights().iter().all(|&x| x == 1.0));
        let w = assign_weights(&c, &WeightPolicy::fixed(1.0, 12.5).unwrap()).unwrap();
        assert_eq!(w.weights(), &[1.0, 1.0, 1.0, 12.5, 12.5]);
        let w = assign_weights(&c, &WeightPolicy::fixed(1.0, 0.5).unwrap()).unwrap();
        assert_eq!(&w.weights()[3..], &[0.5, 0.5]);
        assert_eq!(w.points(), c.points());
    }

    #[test]
    fn assign_rejects_model_points() {
        let m = LabeledPointCloud::uniform(vec![Point3::origin()], Modality::Model, 1.0).unwrap();
        assert!(matches!(assign_weights(&m, &WeightPolicy::default()), Err(Error::ModelLabelPresent(0))));
    }

    #[test]
    fn policy_validation() {
        assert!(WeightPolicy::fixed(0.0, 0.0).is_err());
        assert!(WeightPolicy::fixed(-1.0, 2.0).is_err());
        assert!(WeightPolicy::fixed(0.0, 2.0).is_ok());
    }

    #[test]
    fn fuse_cases() {
        let (v, t) = mixed();
        let p = WeightPolicy::fixed(1.0, 3.5).unwrap();
        let only_v = fuse(&v, &LabeledPointCloud::empty(), &p).unwrap();
        assert_eq!(only_v, v);
        let f = fuse(&v, &t, &p).unwrap();
        assert_eq!(f.len(), 5);
        assert_eq!(
            f.labels(),
            &[Modality::Vision, Modality::Vision, Modality::Vision, Modality::Tactile, Modality::Tactile]
        );
        assert_eq!(segment_modality(&f, Modality::Tactile).points(), t.points());
        assert!(matches!(
            fuse(&LabeledPointCloud::empty(), &LabeledPointCloud::empty(), &p),
            Err(Error::BothEmpty)
        ));
    }

    fn metrics(occlusion: f64) -> CloudMetrics {
        CloudMetrics {
            occlusion,
            noise: 0.4,
            point_count: 100,
            volume: 1000.0,
        }
    }

    #[test]
    fn dynamic_weight_cases() {
        let mut model = AffineWeightModel {
            intercept: 3.5,
            ..Default::default()
        };
        let p = dynamic_weight(&metrics(0.5), &metrics(0.9), &model).unwrap();
        assert_eq!((p.vision_weight(), p.tactile_weight()), (1.0, 3.5));
        assert_eq!(p.mode(), WeightMode::Dynamic);

        model.intercept = 100.0;
        assert_eq!(dynamic_weight(&metrics(0.5), &metrics(0.9), &model).unwrap().tactile_weight(), 50.0);

        model.intercept = 0.0;
        model.vision.occlusion = 10.0;
        let p = dynamic_weight(&metrics(0.9), &metrics(0.1), &model).unwrap();
        assert!((p.tactile_weight() - 9.0).abs() < 1e-12);

        model.vision.occlusion = -10.0;
        assert_eq!(dynamic_weight(&metrics(0.9), &metrics(0.1), &model).unwrap().tactile_weight(), 0.5);
    }
}
