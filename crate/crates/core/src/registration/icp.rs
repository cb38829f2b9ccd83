use serde::{Deserialize, Serialize};

use super::kabsch::weighted_kabsch;
use crate::error::{Error, Result};
use crate::geometry::{KdTree, LabeledPointCloud, Point3, RigidTransform};

/// Floor for the relative-change denominator when the RMSE approaches zero.
const RMSE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Stop once `|rmse_{k−1} − rmse_k| / max(rmse_{k−1}, ε)` falls below this.
    pub rel_rmse_tolerance: f64,
    /// Correspondences farther than this (mm) are left out of the alignment
    /// step. `f64::INFINITY` disables gating.
    pub max_correspondence_distance: f64,
}

impl Default for IcpParams {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            rel_rmse_tolerance: 1e-6,
            max_correspondence_distance: f64::INFINITY,
        }
    }
}

impl IcpParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.rel_rmse_tolerance.is_finite() && self.rel_rmse_tolerance > 0.0) {
            return Err(Error::InvalidParameter("rel_rmse_tolerance must be > 0".into()));
        }
        if self.max_correspondence_distance.is_nan() || self.max_correspondence_distance <= 0.0 {
            return Err(Error::InvalidParameter("max_correspondence_distance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationResult {
    /// Maps source (sensor) coordinates into the target (model) frame.
    pub transform: RigidTransform,
    /// Weighted RMSE over the final correspondences, mm.
    pub final_rmse: f64,
    /// Number of alignment updates performed.
    pub iterations: usize,
    /// Start-selection score; equal to `final_rmse`.
    pub correspondence_error: f64,
    /// Which multi-start orientation produced this result (0 for a single run).
    pub init_index: usize,
    pub converged: bool,
    /// Weighted RMSE at every correspondence step, starting with the initial pose.
    pub rmse_history: Vec<f64>,
}

struct Matches {
    source: Vec<Point3>,
    target: Vec<Point3>,
    weights: Vec<f64>,
    rmse: f64,
}

fn correspond(
    source: &LabeledPointCloud,
    target: &KdTree,
    transform: &RigidTransform,
    max_dist: f64,
) -> Result<Matches> {
    let gate = if max_dist.is_finite() { max_dist * max_dist } else { f64::INFINITY };
    let mut m = Matches {
        source: Vec::with_capacity(source.len()),
        target: Vec::with_capacity(source.len()),
        weights: Vec::with_capacity(source.len()),
        rmse: 0.0,
    };
    let mut sum_wd2 = 0.0;
    let mut sum_w = 0.0;
    for (p, _, w) in source.iter() {
        let moved = transform.transform_point(p);
        let Some((j, d2)) = target.nearest_sq(&moved) else {
            return Err(Error::EmptyCloud);
        };
        if d2 > gate {
            continue;
        }
        m.source.push(*p);
        m.target.push(target.points()[j]);
        m.weights.push(w);
        sum_wd2 += w * d2;
        sum_w += w;
    }
    if m.source.is_empty() {
        return Err(Error::AllCorrespondencesRejected);
    }
    if sum_w <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    m.rmse = (sum_wd2 / sum_w).sqrt();
    Ok(m)
}

/// Weighted ICP of `source` (sensor cloud, with weights) onto `target`
/// (model cloud), starting at `init`.
pub fn icp_weighted(
    source: &LabeledPointCloud,
    target: &LabeledPointCloud,
    init: &RigidTransform,
    params: &IcpParams,
) -> Result<RegistrationResult> {
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    icp_weighted_indexed(source, &KdTree::new(target.points()), init, params)
}

/// [`icp_weighted`] against a prebuilt target index.
pub fn icp_weighted_indexed(
    source: &LabeledPointCloud,
    target: &KdTree,
    init: &RigidTransform,
    params: &IcpParams,
) -> Result<RegistrationResult> {
    params.validate()?;
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let positive = source.weights().iter().filter(|&&w| w > 0.0).count();
    if positive < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "source needs at least 3 positively weighted points, has {positive}"
        )));
    }

    let mut transform = *init;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut matches = correspond(source, target, &transform, params.max_correspondence_distance)?;
    history.push(matches.rmse);

    while iterations < params.max_iterations {
        transform = weighted_kabsch(&matches.source, &matches.target, &matches.weights)?;
        iterations += 1;
        let next = correspond(source, target, &transform, params.max_correspondence_distance)?;
        let prev = matches.rmse;
        history.push(next.rmse);
        matches = next;
        // A residual at rounding level counts as an exact fit.
        if matches.rmse <= RMSE_EPS
            || (prev - matches.rmse).abs() / prev.max(RMSE_EPS) < params.rel_rmse_tolerance
        {
            converged = true;
            break;
        }
    }

    Ok(RegistrationResult {
        transform,
        final_rmse: matches.rmse,
        iterations,
        correspondence_error: matches.rmse,
        init_index: 0,
        converged,
        rmse_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Modality, Vector3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Asymmetric "chair" of random points on three boxes.
    fn asymmetric_cloud(seed: u64, n: usize) -> LabeledPointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let boxes = [
            ([0.0, 0.0, 0.0], [40.0, 20.0, 4.0]),
            ([0.0, 0.0, 0.0], [6.0, 20.0, 30.0]),
            ([30.0, 14.0, 4.0], [38.0, 20.0, 12.0]),
        ];
        let pts = (0..n)
            .map(|i| {
                let (lo, hi) = boxes[i % 3];
                Point3::new(
                    rng.random_range(lo[0]..hi[0]),
                    rng.random_range(lo[1]..hi[1]),
                    rng.random_range(lo[2]..hi[2]),
                )
            })
            .collect();
        LabeledPointCloud::uniform(pts, Modality::Vision, 1.0).unwrap()
    }

    #[test]
    fn subset_at_identity_converges_immediately() {
        let target = asymmetric_cloud(1, 600);
        let source = target.filter_indices(|i| i % 3 == 0);
        let r = icp_weighted(&source, &target, &RigidTransform::identity(), &IcpParams::default()).unwrap();
        assert!((r.transform.to_matrix4() - nalgebra::Matrix4::identity()).norm() < 1e-9);
        assert!(r.final_rmse < 1e-9);
        assert!(r.iterations <= 2);
        assert!(r.converged);
    }

    #[test]
    fn recovers_small_perturbation() {
        let target = asymmetric_cloud(2, 3000);
        let perturb = RigidTransform::from_axis_angle(Vector3::new(0.2, 1.0, -0.4), 10.0, Vector3::new(3.0, -4.0, 0.0));
        let source = target.filter_indices(|i| i % 2 == 0).transformed(&perturb);
        let r = icp_weighted(&source, &target, &RigidTransform::identity(), &IcpParams::default()).unwrap();
        let expected = perturb.inverse();
        let rot_err = r.transform.rotation_angle_to_deg(&expected);
        let trans_err = (r.transform.translation() - expected.translation()).norm();
        assert!(rot_err < 0.5, "rotation error {rot_err}");
        assert!(trans_err < 0.5, "translation error {trans_err}");
    }

    #[test]
    fn rmse_is_monotone() {
        let target = asymmetric_cloud(3, 2000);
        let perturb = RigidTransform::from_axis_angle(Vector3::new(1.0, 0.0, 1.0), 25.0, Vector3::new(5.0, 2.0, -3.0));
        let source = asymmetric_cloud(4, 500).transformed(&perturb);
        let r = icp_weighted(&source, &target, &RigidTransform::identity(), &IcpParams::default()).unwrap();
        for w in r.rmse_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn gating_rejects_everything() {
        let target = asymmetric_cloud(5, 100);
        let source = target.transformed(&RigidTransform::from_translation(Vector3::new(500.0, 0.0, 0.0)));
        let params = IcpParams {
            max_correspondence_distance: 10.0,
            ..Default::default()
        };
        assert!(matches!(
            icp_weighted(&source, &target, &RigidTransform::identity(), &params),
            Err(Error::AllCorrespondencesRejected)
        ));
    }

    #[test]
    fn needs_three_weighted_points() {
        let target = asymmetric_cloud(6, 100);
        let source = target.with_weights((0..100).map(|i| if i < 2 { 1.0 } else { 0.0 }).collect()).unwrap();
        assert!(matches!(
            icp_weighted(&source, &target, &RigidTransform::identity(), &IcpParams::default()),
            Err(Error::DegenerateConfiguration(_))
        ));
        let bad = IcpParams {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(icp_weighted(&target, &target, &RigidTransform::identity(), &bad).is_err());
    }

    #[test]
    fn iteration_limit_is_respected() {
        let target = asymmetric_cloud(7, 1000);
        let source = target.transformed(&RigidTransform::from_axis_angle(Vector3::y(), 30.0, Vector3::zeros()));
        let params = IcpParams {
            max_iterations: 3,
            ..Default::default()
        };
        let r = icp_weighted(&source, &target, &RigidTransform::identity(), &params).unwrap();
        assert_eq!(r.iterations, 3);
        assert_eq!(r.rmse_history.len(), 4);
    }
}
