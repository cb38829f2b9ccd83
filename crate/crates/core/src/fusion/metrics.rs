use serde::{Deserialize, Serialize};

use super::hull::convex_hull;
use crate::error::{Error, Result};
use crate::geometry::{KdTree, LabeledPointCloud};
use crate::preprocess::FrameSequence;

/// Twice the standard 1 mm voxel edge.
pub const DEFAULT_CAPTURE_RADIUS: f64 = 2.0;

/// Summary statistics of one modality's cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudMetrics {
    /// Fraction of the ground-truth surface with no point within the capture radius.
    pub occlusion: f64,
    /// Mean frame-to-frame nearest-neighbour displacement, mm (0 for single captures).
    pub noise: f64,
    pub point_count: usize,
    /// Convex-hull volume, mm³.
    pub volume: f64,
}

/// Fraction of `gt_surface` points with no `vision` point within `capture_radius`.
pub fn occlusion_metric(vision: &LabeledPointCloud, gt_surface: &LabeledPointCloud, capture_radius: f64) -> Result<f64> {
    if gt_surface.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    if vision.is_empty() {
        return Ok(1.0);
    }
    let tree = KdTree::new(vision.points());
    let missed = gt_surface
        .points()
        .iter()
        .filter(|p| !tree.any_within(p, capture_radius))
        .count();
    Ok(missed as f64 / gt_surface.len() as f64)
}

/// Mean over consecutive frame pairs of the mean nearest-neighbour distance
/// from frame `i` to frame `i + 1`. Pairs involving an empty frame are skipped.
pub fn noise_metric(frames: &FrameSequence) -> Result<f64> {
    if frames.len() < 2 {
        return Err(Error::TooFewFrames(frames.len()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for w in frames.frames().windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let tree = KdTree::new(b.points());
        let sum: f64 = a
            .points()
            .iter()
            .filter_map(|p| tree.nearest(p).map(|(_, d)| d))
            .sum();
        total += sum / a.len() as f64;
        pairs += 1;
    }
    Ok(if pairs == 0 { 0.0 } else { total / pairs as f64 })
}

/// Convex-hull volume; zero for fewer than four or coplanar points.
pub fn volume_metric(cloud: &LabeledPointCloud) -> f64 {
    convex_hull(cloud.points()).map_or(0.0, |h| h.volume())
}

/// All four metrics for one modality. `frames` feeds the noise metric when it
/// holds at least two captures.
pub fn cloud_metrics(
    cloud: &LabeledPointCloud,
    frames: Option<&FrameSequence>,
    gt_surface: &LabeledPointCloud,
    capture_radius: f64,
) -> Result<CloudMetrics> {
    let noise = match frames {
        Some(f) if f.len() >= 2 => noise_metric(f)?,
        _ => 0.0,
    };
    Ok(CloudMetrics {
        occlusion: occlusion_metric(cloud, gt_surface, capture_radius)?,
        noise,
        point_count: cloud.len(),
        volume: volume_metric(cloud),
    })
}
