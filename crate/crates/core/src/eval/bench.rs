//! Benchmark runner, weight sweeps, and report aggregation.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{run_trial, Condition, ModelTarget, PipelineConfig, TrialRecord, Weighting};
use super::stats::{pearson, Correlation};
use crate::error::{Error, Result};
use crate::fusion::{AffineWeightModel, WeightPolicy};
use crate::io::write_atomic;
use crate::synth::GraspScene;

/// Occlusion bin edges; the last bin is closed on the right.
pub const OCCLUSION_BINS: [(f64, f64); 4] = [(0.0, 0.5), (0.5, 0.7), (0.7, 0.85), (0.85, 1.0)];

pub const TRIALS_CSV: &str = "trials.csv";
pub const REPORT_JSON: &str = "report.json";
pub const SWEEP_CSV: &str = "sweep_trials.csv";
pub const SWEEP_JSON: &str = "sweep.json";

/// Modality weights used by the benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub vision: f64,
    /// Tactile weight for shapes without an entry in `tactile_by_shape`.
    pub tactile: f64,
    #[serde(default)]
    pub tactile_by_shape: BTreeMap<String, f64>,
    /// When set, tactile weights come from cloud metrics instead.
    #[serde(default)]
    pub dynamic: Option<AffineWeightModel>,
}

impl Default for WeightTable {
    fn default() -> Self {
        Self {
            vision: 1.0,
            tactile: 3.5,
            tactile_by_shape: BTreeMap::new(),
            dynamic: None,
        }
    }
}

impl WeightTable {
    pub fn weighting_for(&self, shape: &str) -> Result<Weighting> {
        if let Some(model) = &self.dynamic {
            return Ok(Weighting::Dynamic(*model));
        }
        let tactile = self.tactile_by_shape.get(shape).copied().unwrap_or(self.tactile);
        Ok(Weighting::Fixed(WeightPolicy::fixed(self.vision, tactile)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub pipeline: PipelineConfig,
    pub weights: WeightTable,
    pub conditions: Vec<Condition>,
}

/// Merge voxel edge of the benchmark pipeline, mm.
pub const BENCH_MERGE_RADIUS: f64 = 2.0;
/// Relative RMSE tolerance of the benchmark pipeline.
pub const BENCH_ICP_TOLERANCE: f64 = 1e-5;

impl Default for BenchConfig {
    /// Default pipeline except for [`BENCH_MERGE_RADIUS`] and
    /// [`BENCH_ICP_TOLERANCE`].
    fn default() -> Self {
        let mut pipeline = PipelineConfig::default();
        pipeline.preprocess.merge_radius = BENCH_MERGE_RADIUS;
        pipeline.icp.rel_rmse_tolerance = BENCH_ICP_TOLERANCE;
        Self {
            pipeline,
            weights: WeightTable::default(),
            conditions: Condition::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMeans {
    pub count: usize,
    pub translation_mm: f64,
    pub rotation_deg: f64,
    pub object_mm: f64,
}

impl ErrorMeans {
    fn of<'a>(records: impl Iterator<Item = &'a TrialRecord>) -> Option<Self> {
        let (mut n, mut t, mut r, mut o) = (0usize, 0.0, 0.0, 0.0);
        for e in records.filter_map(TrialRecord::errors) {
            n += 1;
            t += e.translation_mm;
            r += e.rotation_deg;
            o += e.object_mm;
        }
        (n > 0).then(|| ErrorMeans {
            count: n,
            translation_mm: t / n as f64,
            rotation_deg: r / n as f64,
            object_mm: o / n as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub trials: usize,
    /// Trials where the pipeline produced an estimate.
    pub completed: usize,
    pub successes: usize,
    /// Successes over all trials; a failed pipeline run counts as a failure.
    pub success_rate: f64,
    pub mean_all: Option<ErrorMeans>,
    pub mean_successful: Option<ErrorMeans>,
    /// Correlation between occlusion and object error over completed trials.
    pub occlusion_object_correlation: Option<Correlation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionBin {
    pub lower: f64,
    pub upper: f64,
    pub scenes: usize,
    pub success_rate_vis: Option<f64>,
    pub success_rate_vis_tac: Option<f64>,
    /// Scenes where both conditions produced an estimate.
    pub paired: usize,
    /// Mean of (vis − vis+tac) object error over paired scenes, mm.
    pub mean_improvement_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub scenes: usize,
    pub conditions: Vec<ConditionSummary>,
    pub occlusion_bins: Vec<OcclusionBin>,
}

impl AggregateReport {
    pub fn condition(&self, c: Condition) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|s| s.condition == c)
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub records: Vec<TrialRecord>,
    pub aggregate: AggregateReport,
}

fn bin_index(occlusion: f64) -> usize {
    OCCLUSION_BINS
        .iter()
        .position(|&(_, hi)| occlusion < hi)
        .unwrap_or(OCCLUSION_BINS.len() - 1)
}

fn success_rate<'a>(records: impl Iterator<Item = &'a TrialRecord>) -> Option<f64> {
    let (mut n, mut s) = (0usize, 0usize);
    for r in records {
        n += 1;
        s += r.success as usize;
    }
    (n > 0).then(|| s as f64 / n as f64)
}

/// Summaries per condition and per occlusion bin. Records are folded in
/// the given order, so the result is deterministic.
pub fn aggregate(records: &[TrialRecord], conditions: &[Condition]) -> AggregateReport {
    let summaries = conditions
        .iter()
        .map(|&c| {
            let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.condition == c).collect();
            let completed: Vec<&TrialRecord> = rows.iter().copied().filter(|r| r.errors().is_some()).collect();
            let successes = rows.iter().filter(|r| r.success).count();
            let occ: Vec<f64> = completed.iter().map(|r| r.occlusion).collect();
            let obj: Vec<f64> = completed.iter().filter_map(|r| r.object_error_mm).collect();
            ConditionSummary {
                condition: c,
                trials: rows.len(),
                completed: completed.len(),
                successes,
                success_rate: if rows.is_empty() { 0.0 } else { successes as f64 / rows.len() as f64 },
                mean_all: ErrorMeans::of(rows.iter().copied()),
                mean_successful: ErrorMeans::of(rows.iter().copied().filter(|r| r.success)),
                occlusion_object_correlation: pearson(&occ, &obj).ok(),
            }
        })
        .collect();

    let mut scene_occlusion: Vec<(&str, f64)> = Vec::new();
    let mut by_scene: HashMap<(&str, Condition), &TrialRecord> = HashMap::new();
    for r in records {
        if by_scene.insert((r.scene_id.as_str(), r.condition), r).is_none()
            && !scene_occlusion.iter().any(|(id, _)| *id == r.scene_id)
        {
            scene_occlusion.push((r.scene_id.as_str(), r.occlusion));
        }
    }
    let by_scene = &by_scene;
    let bins = OCCLUSION_BINS
        .iter()
        .enumerate()
        .map(|(b, &(lower, upper))| {
            let ids: Vec<&str> = scene_occlusion
                .iter()
                .filter(|(_, o)| bin_index(*o) == b)
                .map(|(id, _)| *id)
                .collect();
            let ids = &ids;
            let of = |c: Condition| ids.iter().filter_map(move |id| by_scene.get(&(*id, c)).copied());
            let diffs: Vec<f64> = ids
                .iter()
                .filter_map(|id| {
                    let v = by_scene.get(&(*id, Condition::Vision))?.object_error_mm?;
                    let vt = by_scene.get(&(*id, Condition::VisionTactile))?.object_error_mm?;
                    Some(v - vt)
                })
                .collect();
            OcclusionBin {
                lower,
                upper,
                scenes: ids.len(),
                success_rate_vis: success_rate(of(Condition::Vision)),
                success_rate_vis_tac: success_rate(of(Condition::VisionTactile)),
                paired: diffs.len(),
                mean_improvement_mm: (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64),
            }
        })
        .collect();

    AggregateReport {
        scenes: scene_occlusion.len(),
        conditions: summaries,
        occlusion_bins: bins,
    }
}

/// Runs every condition on every scene. Trials execute in parallel on the
/// current rayon pool; records come back in scene order, then condition
/// order. When `output` is set, the trial CSV and the JSON report are written
/// there.
pub fn run_benchmark(scenes: &[GraspScene], config: &BenchConfig, output: Option<&Path>) -> Result<BenchReport> {
    if scenes.is_empty() {
        return Err(Error::EmptyBenchmark);
    }
    if config.conditions.is_empty() {
        return Err(Error::InvalidParameter("benchmark needs at least one condition".into()));
    }
    let per_scene: Vec<Vec<TrialRecord>> = scenes
        .par_iter()
        .map(|scene| -> Result<Vec<TrialRecord>> {
            let target = ModelTarget::new(&scene.mesh, &config.pipeline)?;
            let weighting = config.weights.weighting_for(scene.spec.shape.name())?;
            Ok(config
                .conditions
                .iter()
                .map(|&c| run_trial(scene, c, &weighting, &config.pipeline, &target))
                .collect())
        })
        .collect::<Result<_>>()?;
    let records: Vec<TrialRecord> = per_scene.into_iter().flatten().collect();
    let aggregate = aggregate(&records, &config.conditions);
    if let Some(dir) = output {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_trials_csv(&records, &dir.join(TRIALS_CSV))?;
        write_json(&aggregate, &dir.join(REPORT_JSON))?;
    }
    Ok(BenchReport { records, aggregate })
}

/// Per-trial CSV with the fixed column set.
pub fn trials_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_trials_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_atomic(path, trials_csv(records)?.as_bytes())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    write_atomic(path, json.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub condition: Condition,
    /// `None` for the vision-only baseline.
    pub tactile_weight: Option<f64>,
    pub trials: usize,
    pub completed: usize,
    pub successes: usize,
    pub means: Option<ErrorMeans>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// Vision-only baseline first, then one row per ratio in input order.
    pub rows: Vec<SweepRow>,
    pub records: Vec<TrialRecord>,
}

/// Tactile weights against a vision weight of 1, plus a vision-only
/// baseline. Failed trials are excluded from the means and counted.
pub fn weight_sweep(scenes: &[GraspScene], ratios: &[f64], config: &PipelineConfig) -> Result<SweepReport> {
    if scenes.is_empty() {
        return Err(Error::EmptyBenchmark);
    }
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("weight sweep needs at least one ratio".into()));
    }
    let mut settings = vec![(Condition::Vision, Weighting::Fixed(WeightPolicy::fixed(1.0, 0.0)?))];
    for &r in ratios {
        settings.push((Condition::VisionTactile, Weighting::Fixed(WeightPolicy::fixed(1.0, r)?)));
    }
    let per_scene: Vec<Vec<TrialRecord>> = scenes
        .par_iter()
        .map(|scene| -> Result<Vec<TrialRecord>> {
            let target = ModelTarget::new(&scene.mesh, config)?;
            Ok(settings
                .iter()
                .map(|(c, w)| run_trial(scene, *c, w, config, &target))
                .collect())
        })
        .collect::<Result<_>>()?;

    let rows = settings
        .iter()
        .enumerate()
        .map(|(k, (c, w))| {
            let trials: Vec<&TrialRecord> = per_scene.iter().map(|s| &s[k]).collect();
            SweepRow {
                condition: *c,
                tactile_weight: match (c, w) {
                    (Condition::VisionTactile, Weighting::Fixed(p)) => Some(p.tactile_weight()),
                    _ => None,
                },
                trials: trials.len(),
                completed: trials.iter().filter(|r| r.errors().is_some()).count(),
                successes: trials.iter().filter(|r| r.success).count(),
                means: ErrorMeans::of(trials.into_iter()),
            }
        })
        .collect();
    Ok(SweepReport {
        rows,
        records: per_scene.into_iter().flatten().collect(),
    })
}
