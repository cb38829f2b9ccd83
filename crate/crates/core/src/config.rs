//! Run configuration files.
//!
//! The format is flat keyed text: `key = value` lines grouped under
//! `[section]` headers, where a section and its keys join into one dotted
//! key (`[icp]` + `tol` is `icp.tol`). Keys may also be written fully
//! dotted at the top level. `#` and `;` start comments. Lists are
//! comma-separated.
//!
//! ```text
//! seed = 1
//! output = results
//!
//! [suite]
//! count = 150
//! shapes = knob, handle, slblock
//!
//! [shape.knob]
//! radius = 15
//!
//! [weights]
//! tactile_weight = 3.5
//! tactile_weight.slblock = 0.5
//!
//! [icp]
//! max_iterations = 100
//! max_correspondence_distance = inf
//! ```
//!
//! Every error names the offending line and key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::{BenchConfig, Condition};
use crate::fusion::{AffineWeightModel, MetricSlopes, WeightMode};
use crate::geometry::{Point3, Vector3};
use crate::synth::{ContactPlacement, PoseSampler, ShapeSpec, SuiteConfig};

/// Default tactile weights of the sweep.
pub const DEFAULT_SWEEP_RATIOS: [f64; 5] = [0.5, 1.0, 3.5, 12.5, 50.0];

/// One `key = value` line, with its section folded into the key.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits config text into entries. Duplicate keys are rejected.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut entries: Vec<Entry> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| invalid(line, content, "unterminated section header"))?;
            let name = name.trim();
            if name.is_empty() || !valid_key(name) {
                return Err(invalid(line, name, "bad section name"));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| invalid(line, content, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() || !valid_key(key) {
            return Err(invalid(line, key, "bad key"));
        }
        let key = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        if let Some(first) = seen.insert(key.clone(), line) {
            return Err(invalid(line, &key, &format!("duplicate key (first set on line {first})")));
        }
        entries.push(Entry {
            line,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn valid_key(key: &str) -> bool {
    key.split('.')
        .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
}

fn invalid(line: usize, key: &str, message: &str) -> Error {
    Error::InvalidConfig {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

/// Everything a CLI run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Scene generation; `suite.seed` is the base seed of the run.
    pub suite: SuiteConfig,
    /// Existing scene directories to load instead of generating a suite.
    pub scenes: Option<PathBuf>,
    pub bench: BenchConfig,
    pub sweep_ratios: Vec<f64>,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            suite: SuiteConfig::default(),
            scenes: None,
            bench: BenchConfig::default(),
            sweep_ratios: DEFAULT_SWEEP_RATIOS.to_vec(),
            output: None,
            jobs: None,
        }
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses config text. Relative paths resolve against `base_dir`, and
    /// every input path must exist.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut shape_names: Option<(usize, Vec<String>)> = None;
        let mut shape_dims: BTreeMap<String, Vec<&Entry>> = BTreeMap::new();
        let mut mode = WeightMode::Fixed;
        let mut dynamic = AffineWeightModel::default();
        let mut dynamic_line = None;
        let mut occlusion = cfg.suite.occlusion_range;

        let entries = parse_entries(text)?;
        for e in &entries {
            let v = Value(e);
            let key = e.key.as_str();
            let suite = &mut cfg.suite;
            let pipeline = &mut cfg.bench.pipeline;
            match key {
                "seed" | "suite.seed" => suite.seed = v.parse()?,
                "jobs" => cfg.jobs = Some(v.positive_int()?),
                "output" => cfg.output = Some(base_dir.join(v.non_empty()?)),
                "scenes" | "suite.scenes" => cfg.scenes = Some(v.existing_path(base_dir)?),
                "suite.count" => suite.count = v.parse()?,
                "suite.shapes" => shape_names = Some((e.line, v.list()?)),
                "suite.occlusion_min" => occlusion.0 = v.unit()?,
                "suite.occlusion_max" => occlusion.1 = v.unit()?,
                "suite.translation_range" => {
                    suite.pose = PoseSampler::Uniform {
                        translation_range: v.non_negative()?,
                    }
                }
                "camera.position" => suite.camera.position = Point3::from(v.vector()?),
                "camera.look_at" => suite.camera.look_at = Point3::from(v.vector()?),
                "camera.fov_deg" => suite.camera.fov_deg = v.positive()?,
                "camera.noise_sigma" => suite.camera.noise_sigma = v.non_negative()?,
                "camera.frame_count" => suite.camera.frame_count = v.positive_int()?,
                "camera.dropout_fraction" => suite.camera.dropout_fraction = v.unit()?,
                "tactile.contacts" => {
                    suite.tactile.contacts = match v.non_empty()? {
                        "antipodal" => ContactPlacement::Antipodal,
                        "none" => ContactPlacement::None,
                        _ => return Err(v.error("expected `antipodal` or `none`")),
                    }
                }
                "tactile.patch_radius" => suite.tactile.patch_radius = v.positive()?,
                "tactile.noise_sigma" => suite.tactile.noise_sigma = v.non_negative()?,
                "weights.vision_weight" => cfg.bench.weights.vision = v.non_negative()?,
                "weights.tactile_weight" => cfg.bench.weights.tactile = v.non_negative()?,
                "weights.mode" => mode = v.parse()?,
                "icp.max_iterations" => pipeline.icp.max_iterations = v.positive_int()?,
                "icp.rel_rmse_tolerance" | "icp.tol" => pipeline.icp.rel_rmse_tolerance = v.positive()?,
                "icp.max_correspondence_distance" | "icp.max_corr_dist" => {
                    pipeline.icp.max_correspondence_distance = v.positive()?
                }
                "preprocess.merge_radius" => pipeline.preprocess.merge_radius = v.positive()?,
                "preprocess.outlier_k" => pipeline.preprocess.outlier_k = v.positive_int()?,
                "preprocess.outlier_std_ratio" => pipeline.preprocess.outlier_std_ratio = v.positive()?,
                "pipeline.model_seed" => pipeline.model_seed = v.parse()?,
                "pipeline.symmetry_axis" => {
                    pipeline.symmetry_axis = match v.non_empty()? {
                        "none" => None,
                        _ => {
                            let axis = v.vector()?;
                            if axis.norm() < 1e-12 {
                                return Err(v.error("symmetry axis must be nonzero"));
                            }
                            Some(axis.normalize())
                        }
                    }
                }
                "bench.conditions" => {
                    cfg.bench.conditions = v
                        .list()?
                        .iter()
                        .map(|s| Condition::from_str(s).map_err(|err| v.error(&err.to_string())))
                        .collect::<Result<_>>()?;
                    if cfg.bench.conditions.is_empty() {
                        return Err(v.error("at least one condition is required"));
                    }
                }
                "sweep.ratios" => {
                    let ratios = v
                        .list()?
                        .iter()
                        .map(|s| parse_positive(s).ok_or_else(|| v.error(&format!("`{s}` is not a positive number"))))
                        .collect::<Result<Vec<f64>>>()?;
                    if ratios.is_empty() {
                        return Err(v.error("at least one ratio is required"));
                    }
                    cfg.sweep_ratios = ratios;
                }
                _ => {
                    if let Some(shape) = key.strip_prefix("weights.tactile_weight.") {
                        ShapeSpec::from_name(shape).map_err(|_| v.error("unknown shape"))?;
                        cfg.bench.weights.tactile_by_shape.insert(shape.to_string(), v.non_negative()?);
                    } else if let Some(coef) = key.strip_prefix("weights.dynamic.") {
                        dynamic_line.get_or_insert(e.line);
                        set_dynamic(&mut dynamic, coef, &v)?;
                    } else if let Some(rest) = key.strip_prefix("shape.") {
                        let (shape, _) = rest.split_once('.').ok_or_else(|| v.error("expected `shape.<name>.<dimension>`"))?;
                        shape_dims.entry(shape.to_string()).or_default().push(e);
                    } else {
                        return Err(v.error("unknown key"));
                    }
                }
            }
        }

        if occlusion.0 > occlusion.1 {
            let line = entries
                .iter()
                .find(|e| e.key == "suite.occlusion_max")
                .map_or(0, |e| e.line);
            return Err(invalid(line, "suite.occlusion_max", "must not be below suite.occlusion_min"));
        }
        cfg.suite.occlusion_range = occlusion;

        for (name, dims) in &shape_dims {
            let used = shape_names
                .as_ref()
                .map_or(name != "custom" && ShapeSpec::from_name(name).is_ok(), |(_, names)| {
                    names.iter().any(|n| n == name)
                });
            if !used {
                let e = dims[0];
                return Err(invalid(e.line, &e.key, "shape is not listed in suite.shapes"));
            }
        }
        if let Some((line, names)) = shape_names {
            if names.is_empty() {
                return Err(invalid(line, "suite.shapes", "at least one shape is required"));
            }
            cfg.suite.shapes = names
                .iter()
                .map(|name| build_shape(name, shape_dims.get(name).map_or(&[][..], |d| d), line, base_dir))
                .collect::<Result<_>>()?;
        } else {
            for shape in &mut cfg.suite.shapes {
                if let Some(dims) = shape_dims.get(shape.name()) {
                    *shape = build_shape(shape.name(), dims, 0, base_dir)?;
                }
            }
        }

        match mode {
            WeightMode::Dynamic => cfg.bench.weights.dynamic = Some(dynamic),
            WeightMode::Fixed => {
                if let Some(line) = dynamic_line {
                    return Err(invalid(line, "weights.mode", "dynamic coefficients given but mode is `fixed`"));
                }
            }
        }
        Ok(cfg)
    }

    /// Checks the parts whose validity depends on more than one key.
    pub fn validate(&self) -> Result<()> {
        self.suite.camera.validate()?;
        self.bench.pipeline.icp.validate()?;
        self.bench.weights.weighting_for("")?;
        Ok(())
    }
}

fn build_shape(name: &str, dims: &[&Entry], list_line: usize, base_dir: &Path) -> Result<ShapeSpec> {
    let mut shape = if name == "custom" {
        let path = dims
            .iter()
            .find(|e| e.key == "shape.custom.path")
            .ok_or_else(|| invalid(list_line, "shape.custom.path", "custom shape needs a mesh path"))?;
        ShapeSpec::Custom {
            path: Value(path).existing_path(base_dir)?,
        }
    } else {
        ShapeSpec::from_name(name).map_err(|e| invalid(list_line, "suite.shapes", &e.to_string()))?
    };
    for e in dims {
        let v = Value(e);
        let dim = e.key.rsplit('.').next().unwrap_or_default();
        let slot: &mut f64 = match (&mut shape, dim) {
            (ShapeSpec::Custom { .. }, "path") => continue,
            (ShapeSpec::Knob { radius, .. }, "radius") => radius,
            (ShapeSpec::Knob { height, .. }, "height") => height,
            (ShapeSpec::Handle { length, .. }, "length") => length,
            (ShapeSpec::Handle { width, .. }, "width") => width,
            (ShapeSpec::Handle { stem_length, .. }, "stem_length") => stem_length,
            (ShapeSpec::SlBlock { cell }, "cell") => cell,
            (ShapeSpec::Screwdriver { handle_radius, .. }, "handle_radius") => handle_radius,
            (ShapeSpec::Screwdriver { handle_length, .. }, "handle_length") => handle_length,
            (ShapeSpec::Screwdriver { shaft_radius, .. }, "shaft_radius") => shaft_radius,
            (ShapeSpec::Screwdriver { shaft_length, .. }, "shaft_length") => shaft_length,
            _ => return Err(v.error(&format!("`{name}` has no dimension `{dim}`"))),
        };
        *slot = v.positive()?;
    }
    Ok(shape)
}

fn slope_mut<'a>(slopes: &'a mut MetricSlopes, metric: &str) -> Option<&'a mut f64> {
    match metric {
        "occlusion" => Some(&mut slopes.occlusion),
        "noise" => Some(&mut slopes.noise),
        "point_count" => Some(&mut slopes.point_count),
        "volume" => Some(&mut slopes.volume),
        _ => None,
    }
}

fn set_dynamic(model: &mut AffineWeightModel, coef: &str, v: &Value) -> Result<()> {
    let value: f64 = v.parse()?;
    if !value.is_finite() {
        return Err(v.error("coefficient must be finite"));
    }
    let slot = match coef.split_once('.') {
        None if coef == "intercept" => &mut model.intercept,
        Some(("vision", metric)) => slope_mut(&mut model.vision, metric).ok_or_else(|| v.error("unknown metric"))?,
        Some(("tactile", metric)) => slope_mut(&mut model.tactile, metric).ok_or_else(|| v.error("unknown metric"))?,
        _ => return Err(v.error("unknown dynamic coefficient")),
    };
    *slot = value;
    Ok(())
}

fn parse_positive(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| *x > 0.0 && !x.is_nan())
}

/// Typed access to one entry's value, with line/key diagnostics.
struct Value<'a>(&'a Entry);

impl Value<'_> {
    fn error(&self, message: &str) -> Error {
        invalid(self.0.line, &self.0.key, message)
    }

    fn non_empty(&self) -> Result<&str> {
        if self.0.value.is_empty() {
            Err(self.error("missing value"))
        } else {
            Ok(&self.0.value)
        }
    }

    fn parse<T: FromStr>(&self) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.non_empty()?
            .parse()
            .map_err(|e: T::Err| self.error(&format!("`{}`: {e}", self.0.value)))
    }

    fn positive(&self) -> Result<f64> {
        let x: f64 = self.parse()?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.error("must be > 0"))
        }
    }

    fn non_negative(&self) -> Result<f64> {
        let x: f64 = self.parse()?;
        if x.is_finite() && x >= 0.0 {
            Ok(x)
        } else {
            Err(self.error("must be a finite number >= 0"))
        }
    }

    fn unit(&self) -> Result<f64> {
        let x: f64 = self.parse()?;
        if (0.0..=1.0).contains(&x) {
            Ok(x)
        } else {
            Err(self.error("must be in [0, 1]"))
        }
    }

    fn positive_int(&self) -> Result<usize> {
        match self.parse::<usize>()? {
            0 => Err(self.error("must be >= 1")),
            n => Ok(n),
        }
    }

    fn list(&self) -> Result<Vec<String>> {
        Ok(self
            .non_empty()?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect())
    }

    fn vector(&self) -> Result<Vector3> {
        let parts = self.list()?;
        let xs: Vec<f64> = parts
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| self.error("expected three finite numbers"))?;
        match xs.as_slice() {
            [x, y, z] => Ok(Vector3::new(*x, *y, *z)),
            _ => Err(self.error("expected three comma-separated numbers")),
        }
    }

    fn existing_path(&self, base_dir: &Path) -> Result<PathBuf> {
        let path = base_dir.join(self.non_empty()?);
        if path.exists() {
            Ok(path)
        } else {
            Err(self.error(&format!("path {} does not exist", path.display())))
        }
    }
}
