//! Sensor-cloud conditioning: voxel downsampling, statistical outlier removal,
//! temporal averaging and modality segmentation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{voxel_key, KdTree, LabeledPointCloud, Modality, Point3, Vector3};

pub const DEFAULT_OUTLIER_K: usize = 8;
pub const DEFAULT_OUTLIER_STD_RATIO: f64 = 2.0;
pub const DEFAULT_FRAME_COUNT: usize = 5;

/// Successive captures of one modality. Individual frames may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<LabeledPointCloud>,
}

impl FrameSequence {
    pub fn new(frames: Vec<LabeledPointCloud>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::NoFrames);
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[LabeledPointCloud] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// All frames concatenated in order.
    pub fn concatenated(&self) -> LabeledPointCloud {
        self.frames
            .iter()
            .fold(LabeledPointCloud::empty(), |acc, f| acc.concat(f))
    }
}

/// Collapses every occupied voxel to one point: the weight-weighted centroid
/// (plain mean if the voxel's weights sum to zero), carrying the summed weight
/// and the majority label. Label ties go to tactile, then vision, then model.
/// Output is ordered by voxel key, so it does not depend on input order.
pub fn voxel_downsample(cloud: &LabeledPointCloud, voxel_edge: f64) -> Result<LabeledPointCloud> {
    if !(voxel_edge.is_finite() && voxel_edge > 0.0) {
        return Err(Error::InvalidParameter(format!("voxel edge must be > 0, got {voxel_edge}")));
    }
    #[derive(Default)]
    struct Acc {
        weighted: Vector3,
        plain: Vector3,
        weight: f64,
        count: usize,
        // vision, tactile, model
        labels: [usize; 3],
    }
    let mut cells: HashMap<[i64; 3], Acc> = HashMap::new();
    for (p, label, w) in cloud.iter() {
        let acc = cells.entry(voxel_key(p, voxel_edge)).or_default();
        acc.weighted += p.coords * w;
        acc.plain += p.coords;
        acc.weight += w;
        acc.count += 1;
        acc.labels[label_slot(label)] += 1;
    }
    let mut keys: Vec<[i64; 3]> = cells.keys().copied().collect();
    keys.sort_unstable();

    let mut points = Vec::with_capacity(keys.len());
    let mut labels = Vec::with_capacity(keys.len());
    let mut weights = Vec::with_capacity(keys.len());
    for k in keys {
        let acc = &cells[&k];
        let centre = if acc.weight > 0.0 {
            acc.weighted / acc.weight
        } else {
            acc.plain / acc.count as f64
        };
        points.push(Point3::from(centre));
        labels.push(majority_label(&acc.labels));
        weights.push(acc.weight);
    }
    LabeledPointCloud::new(points, labels, weights)
}

fn label_slot(label: Modality) -> usize {
    match label {
        Modality::Vision => 0,
        Modality::Tactile => 1,
        Modality::Model => 2,
    }
}

fn majority_label(counts: &[usize; 3]) -> Modality {
    let top = counts.iter().copied().max().unwrap_or(0);
    [Modality::Tactile, Modality::Vision, Modality::Model]
        .into_iter()
        .find(|&l| counts[label_slot(l)] == top)
        .unwrap_or(Modality::Vision)
}

/// Mean distance of each point to its `k` nearest neighbours (itself excluded).
pub fn mean_knn_distances(cloud: &LabeledPointCloud, k: usize) -> Vec<f64> {
    let tree = KdTree::new(cloud.points());
    cloud
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let nn = tree.k_nearest(p, k + 1);
            let mut sum = 0.0;
            let mut taken = 0;
            for &(j, d) in &nn {
                if j == i || taken == k {
                    continue;
                }
                sum += d;
                taken += 1;
            }
            sum / taken.max(1) as f64
        })
        .collect()
}

/// Statistical outlier removal: keeps a point iff its mean k-NN distance is
/// at most `μ + std_ratio·σ` (population statistics over the cloud).
///
/// At least `k` points always survive; if the threshold would leave fewer, the
/// `k` points with the smallest statistic are kept instead.
pub fn remove_outliers(cloud: &LabeledPointCloud, k: usize, std_ratio: f64) -> Result<LabeledPointCloud> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(std_ratio.is_finite() && std_ratio > 0.0) {
        return Err(Error::InvalidParameter(format!("std_ratio must be > 0, got {std_ratio}")));
    }
    if cloud.len() <= k {
        return Err(Error::TooFewPoints {
            size: cloud.len(),
            required: k + 1,
        });
    }
    let stats = mean_knn_distances(cloud, k);
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt();
    if sigma <= 1e-12 * mean.max(1.0) {
        return Ok(cloud.clone());
    }
    let threshold = mean + std_ratio * sigma;
    let mut keep: Vec<bool> = stats.iter().map(|&s| s <= threshold).collect();
    if keep.iter().filter(|&&b| b).count() < k {
        let mut order: Vec<usize> = (0..stats.len()).collect();
        order.sort_by(|&a, &b| stats[a].total_cmp(&stats[b]).then(a.cmp(&b)));
        keep = vec![false; stats.len()];
        for &i in order.iter().take(k) {
            keep[i] = true;
        }
    }
    Ok(cloud.filter_indices(|i| keep[i]))
}

/// Concatenates the frames and voxel-downsamples with edge `merge_radius`,
/// then divides weights by the frame count so averaging does not change the
/// cloud's overall influence.
pub fn temporal_average(frames: &FrameSequence, merge_radius: f64) -> Result<LabeledPointCloud> {
    let merged = voxel_downsample(&frames.concatenated(), merge_radius)?;
    let n = frames.len() as f64;
    let weights = merged.weights().iter().map(|w| w / n).collect();
    merged.with_weights(weights)
}

/// Points carrying label `keep`, in original order.
pub fn segment_modality(cloud: &LabeledPointCloud, keep: Modality) -> LabeledPointCloud {
    let labels = cloud.labels();
    cloud.filter_indices(|i| labels[i] == keep)
}

/// Sensor-cloud conditioning parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PreprocessParams {
    /// Voxel edge for temporal averaging and final density, mm.
    pub merge_radius: f64,
    pub outlier_k: usize,
    pub outlier_std_ratio: f64,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            merge_radius: 1.0,
            outlier_k: DEFAULT_OUTLIER_K,
            outlier_std_ratio: DEFAULT_OUTLIER_STD_RATIO,
        }
    }
}

/// Vision chain: segment → temporal average → outlier removal (skipped when
/// too few points remain for the k-NN statistic).
pub fn preprocess_vision(frames: &FrameSequence, params: &PreprocessParams) -> Result<LabeledPointCloud> {
    let segmented: Vec<LabeledPointCloud> = frames
        .frames()
        .iter()
        .map(|f| segment_modality(f, Modality::Vision))
        .collect();
    let averaged = temporal_average(&FrameSequence::new(segmented)?, params.merge_radius)?;
    if averaged.len() <= params.outlier_k {
        return Ok(averaged);
    }
    remove_outliers(&averaged, params.outlier_k, params.outlier_std_ratio)
}

/// Tactile chain: downsample to the standard density.
pub fn preprocess_tactile(cloud: &LabeledPointCloud, params: &PreprocessParams) -> Result<LabeledPointCloud> {
    voxel_downsample(&segment_modality(cloud, Modality::Tactile), params.merge_radius)
}
