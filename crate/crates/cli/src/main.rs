//! `vtpose` command-line front end.
//!
//! Exit status: 0 on success, 1 on an operational error, 2 when `register`
//! classifies its estimate as a failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vtpose::config::RunConfig;
use vtpose::eval::{
    estimate_pose, run_benchmark, weight_sweep, write_json, write_trials_csv, AggregateReport, Condition, ModelTarget,
    SweepReport, SWEEP_CSV, SWEEP_JSON,
};
use vtpose::fusion::{cloud_metrics, CloudMetrics, DEFAULT_CAPTURE_RADIUS};
use vtpose::preprocess::{preprocess_tactile, preprocess_vision};
use vtpose::synth::{generate_scene, generate_suite, load_scene, load_scenes, preset, save_scene, GraspScene, SuiteConfig};
use vtpose::{Error, RigidTransform};

#[derive(Parser)]
#[command(name = "vtpose", version, about = "Visuo-tactile in-hand pose estimation")]
struct Cli {
    /// INI-style run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic grasp scenes.
    Gen {
        /// Number of scenes (default: the config's suite count).
        #[arg(long)]
        count: Option<usize>,
        /// Generate one named preset instead of the suite.
        #[arg(long, conflicts_with = "count")]
        preset: Option<String>,
    },
    /// Estimate the pose of one scene and score it.
    Register {
        scene: PathBuf,
        #[command(flatten)]
        reg: RegistrationFlags,
    },
    /// Mean errors over a range of tactile weights.
    Sweep {
        #[command(flatten)]
        set: SceneSet,
        /// Comma-separated tactile weights (vision weight is 1).
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[command(flatten)]
        reg: RegistrationFlags,
    },
    /// Vision-only against vision+tactile over a scene set.
    Bench {
        #[command(flatten)]
        set: SceneSet,
        #[command(flatten)]
        reg: RegistrationFlags,
    },
    /// Print cloud metrics of a scene.
    Metrics { scene: PathBuf },
}

#[derive(Args)]
struct SceneSet {
    /// Directory of saved scenes; without it the suite is generated.
    #[arg(long)]
    scenes: Option<PathBuf>,
    /// Number of generated scenes.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct RegistrationFlags {
    /// Ignore the tactile cloud.
    #[arg(long)]
    vision_only: bool,
    #[arg(long)]
    vision_weight: Option<f64>,
    /// Tactile weight for every shape.
    #[arg(long)]
    tactile_weight: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative RMSE change below which ICP stops.
    #[arg(long)]
    tol: Option<f64>,
    /// Correspondence gating distance in mm.
    #[arg(long)]
    max_corr_dist: Option<f64>,
}

impl RegistrationFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        let weights = &mut cfg.bench.weights;
        if let Some(w) = self.vision_weight {
            weights.vision = w;
        }
        if let Some(w) = self.tactile_weight {
            weights.tactile = w;
            weights.tactile_by_shape.clear();
            weights.dynamic = None;
        }
        let icp = &mut cfg.bench.pipeline.icp;
        if let Some(n) = self.max_iters {
            icp.max_iterations = n;
        }
        if let Some(t) = self.tol {
            icp.rel_rmse_tolerance = t;
        }
        if let Some(d) = self.max_corr_dist {
            icp.max_correspondence_distance = d;
        }
        if self.vision_only {
            cfg.bench.conditions = vec![Condition::Vision];
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.suite.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = Some(jobs);
    }
    if let Some(output) = &cli.output {
        cfg.output = Some(output.clone());
    }
    if cfg.jobs == Some(0) {
        return Err(Error::InvalidParameter("--jobs must be >= 1".into()));
    }
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Gen { count, preset } => cmd_gen(&cfg, count, preset.as_deref(), cli.seed),
        Command::Register { scene, reg } => {
            reg.apply(&mut cfg);
            cfg.validate()?;
            cmd_register(&cfg, &scene, reg.vision_only)
        }
        Command::Sweep { set, ratios, reg } => {
            reg.apply(&mut cfg);
            cfg.validate()?;
            if let Some(r) = ratios {
                cfg.sweep_ratios = r;
            }
            let scenes = scene_set(&cfg, &set, reg.vision_only)?;
            cmd_sweep(&cfg, &scenes)
        }
        Command::Bench { set, reg } => {
            reg.apply(&mut cfg);
            cfg.validate()?;
            let scenes = scene_set(&cfg, &set, reg.vision_only)?;
            cmd_bench(&cfg, &scenes)
        }
        Command::Metrics { scene } => cmd_metrics(&cfg, &scene),
    }
}

fn output_dir(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn cmd_gen(cfg: &RunConfig, count: Option<usize>, preset_name: Option<&str>, seed: Option<u64>) -> Result<ExitCode, Error> {
    let out = output_dir(cfg, "scenes");
    let scenes = match preset_name {
        Some(name) => {
            let (spec, preset_seed) = preset(name)?;
            vec![generate_scene(&spec, seed.unwrap_or(preset_seed))?]
        }
        None => {
            let suite = SuiteConfig {
                count: count.unwrap_or(cfg.suite.count),
                ..cfg.suite.clone()
            };
            if suite.count == 0 {
                log::warn!("scene count is 0; nothing to generate");
                return Ok(ExitCode::SUCCESS);
            }
            log::info!("generating {} scenes from seed {}", suite.count, suite.seed);
            generate_suite(&suite)?
        }
    };
    for scene in &scenes {
        let dir = out.join(&scene.id);
        save_scene(scene, &dir)?;
        log::info!("wrote {} (occlusion {:.3})", dir.display(), scene.metadata.occlusion);
    }
    println!("{} scene(s) written to {}", scenes.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn scene_set(cfg: &RunConfig, set: &SceneSet, vision_only: bool) -> Result<Vec<GraspScene>, Error> {
    let dir = set.scenes.as_ref().or(cfg.scenes.as_ref());
    let scenes = match dir {
        Some(dir) => {
            log::info!("loading scenes from {}", dir.display());
            load_scenes(dir, !vision_only)?
        }
        None => {
            let suite = SuiteConfig {
                count: set.count.unwrap_or(cfg.suite.count),
                ..cfg.suite.clone()
            };
            log::info!("generating {} scenes from seed {}", suite.count, suite.seed);
            generate_suite(&suite)?
        }
    };
    if scenes.is_empty() {
        return Err(Error::EmptyBenchmark);
    }
    Ok(scenes)
}

fn print_transform(t: &RigidTransform) {
    for row in t.to_row_major() {
        println!("  {:>12.6} {:>12.6} {:>12.6} {:>12.6}", row[0], row[1], row[2], row[3]);
    }
}

fn cmd_register(cfg: &RunConfig, dir: &Path, vision_only: bool) -> Result<ExitCode, Error> {
    let scene = load_scene(dir, !vision_only)?;
    let condition = if vision_only {
        Condition::Vision
    } else {
        Condition::VisionTactile
    };
    let pipeline = &cfg.bench.pipeline;
    let weighting = cfg.bench.weights.weighting_for(scene.spec.shape.name())?;
    let target = ModelTarget::new(&scene.mesh, pipeline)?;
    let est = estimate_pose(&scene, condition, &weighting, pipeline, &target)?;
    let errors = target.errors(&est.pose, &scene.gt_pose);

    println!("scene {} ({condition})", scene.id);
    match condition {
        Condition::Vision => println!("weights: vision {}", est.policy.vision_weight()),
        Condition::VisionTactile => println!(
            "weights: vision {}, tactile {}",
            est.policy.vision_weight(),
            est.policy.tactile_weight()
        ),
    }
    println!("estimated pose (model to world):");
    print_transform(&est.pose);
    println!(
        "start {} of 24, {} iterations, rmse {:.4} mm",
        est.registration.init_index, est.registration.iterations, est.registration.final_rmse
    );
    println!("translation error: {:.3} mm", errors.translation_mm);
    println!("rotation error:    {:.3} deg", errors.rotation_deg);
    println!("object error:      {:.3} mm", errors.object_mm);
    let success = errors.success();
    println!("success: {}", if success { "yes" } else { "no" });
    Ok(if success { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_sweep(cfg: &RunConfig, scenes: &[GraspScene]) -> Result<ExitCode, Error> {
    let out = output_dir(cfg, "results");
    log::info!(
        "sweeping {} tactile weights over {} scenes",
        cfg.sweep_ratios.len(),
        scenes.len()
    );
    let report = weight_sweep(scenes, &cfg.sweep_ratios, &cfg.bench.pipeline)?;
    std::fs::create_dir_all(&out).map_err(|e| Error::InvalidParameter(format!("{}: {e}", out.display())))?;
    write_trials_csv(&report.records, &out.join(SWEEP_CSV))?;
    write_json(&report.rows, &out.join(SWEEP_JSON))?;
    print_sweep(&report);
    log::info!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn fmt_opt(x: Option<f64>, width: usize, precision: usize) -> String {
    match x {
        Some(v) => format!("{v:>width$.precision$}"),
        None => format!("{:>width$}", "-"),
    }
}

fn print_sweep(report: &SweepReport) {
    println!(
        "{:<8} {:>8} {:>6} {:>9} {:>9} {:>9} {:>9}",
        "cond", "tactile", "done", "success", "trans_mm", "rot_deg", "obj_mm"
    );
    for row in &report.rows {
        let m = row.means.as_ref();
        println!(
            "{:<8} {} {:>6} {:>8.1}% {} {} {}",
            row.condition.as_str(),
            fmt_opt(row.tactile_weight, 8, 1),
            row.completed,
            100.0 * row.successes as f64 / row.trials.max(1) as f64,
            fmt_opt(m.map(|m| m.translation_mm), 9, 2),
            fmt_opt(m.map(|m| m.rotation_deg), 9, 2),
            fmt_opt(m.map(|m| m.object_mm), 9, 2),
        );
    }
}

fn cmd_bench(cfg: &RunConfig, scenes: &[GraspScene]) -> Result<ExitCode, Error> {
    let out = output_dir(cfg, "results");
    log::info!(
        "benchmarking {} scenes under {} condition(s)",
        scenes.len(),
        cfg.bench.conditions.len()
    );
    let report = run_benchmark(scenes, &cfg.bench, Some(&out))?;
    let failed = report.records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} trial(s) ended with a pipeline error");
    }
    print_aggregate(&report.aggregate);
    log::info!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn print_aggregate(agg: &AggregateReport) {
    println!(
        "{:<8} {:>6} {:>9} {:>9} {:>9} {:>9} {:>10}",
        "cond", "trials", "success", "trans_mm", "rot_deg", "obj_mm", "r(occ,obj)"
    );
    for c in &agg.conditions {
        let m = c.mean_all.as_ref();
        println!(
            "{:<8} {:>6} {:>8.1}% {} {} {} {}",
            c.condition.as_str(),
            c.trials,
            100.0 * c.success_rate,
            fmt_opt(m.map(|m| m.translation_mm), 9, 2),
            fmt_opt(m.map(|m| m.rotation_deg), 9, 2),
            fmt_opt(m.map(|m| m.object_mm), 9, 2),
            fmt_opt(c.occlusion_object_correlation.map(|r| r.r), 10, 3),
        );
    }
    println!();
    println!(
        "{:<12} {:>6} {:>8} {:>8} {:>14}",
        "occlusion", "scenes", "vis", "vis+tac", "improvement_mm"
    );
    for b in &agg.occlusion_bins {
        let pct = |x: Option<f64>| fmt_opt(x.map(|v| 100.0 * v), 7, 1) + if x.is_some() { "%" } else { " " };
        println!(
            "[{:.2}, {:.2}{} {:>6} {} {} {}",
            b.lower,
            b.upper,
            if b.upper >= 1.0 { "]" } else { ")" },
            b.scenes,
            pct(b.success_rate_vis),
            pct(b.success_rate_vis_tac),
            fmt_opt(b.mean_improvement_mm, 14, 2),
        );
    }
}

fn print_metrics(name: &str, m: &CloudMetrics) {
    println!(
        "{name:<8} occlusion {:.4}  noise {:.4} mm  points {}  volume {:.1} mm^3",
        m.occlusion, m.noise, m.point_count, m.volume
    );
}

fn cmd_metrics(cfg: &RunConfig, dir: &Path) -> Result<ExitCode, Error> {
    let scene = load_scene(dir, false)?;
    let params = &cfg.bench.pipeline.preprocess;
    let vision = preprocess_vision(&scene.vision_frames, params)?;
    let tactile = preprocess_tactile(&scene.tactile_cloud, params)?;
    println!("scene {} (stored occlusion {:.4})", scene.id, scene.metadata.occlusion);
    print_metrics(
        "vision",
        &cloud_metrics(&vision, Some(&scene.vision_frames), &scene.gt_surface, DEFAULT_CAPTURE_RADIUS)?,
    );
    print_metrics(
        "tactile",
        &cloud_metrics(&tactile, None, &scene.gt_surface, DEFAULT_CAPTURE_RADIUS)?,
    );
    Ok(ExitCode::SUCCESS)
}
