//! Scene directories.
//!
//! Layout: `mesh.obj`, `vision_000.ply` and up (one per frame), `tactile.ply`,
//! `gt_surface.ply`, and the `scene.json` manifest. The manifest is written
//! last through an atomic rename, so a directory without it is incomplete.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scene::{GraspScene, SceneMetadata, SceneSpec};
use crate::error::{Error, Result};
use crate::geometry::{LabeledPointCloud, RigidTransform};
use crate::io::{read_obj, read_ply, write_atomic, write_obj, write_ply};
use crate::preprocess::FrameSequence;

pub const MANIFEST_FILE: &str = "scene.json";
const MESH_FILE: &str = "mesh.obj";
const TACTILE_FILE: &str = "tactile.ply";
const GT_SURFACE_FILE: &str = "gt_surface.ply";

fn frame_file(index: usize) -> String {
    format!("vision_{index:03}.ply")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub id: String,
    pub seed: u64,
    pub spec: SceneSpec,
    /// Model-to-world transform, serialized as a row-major 4×4 matrix.
    pub gt_pose: RigidTransform,
    pub frame_count: usize,
    pub metadata: SceneMetadata,
}

pub fn save_scene(scene: &GraspScene, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    match std::fs::remove_file(&manifest_path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(Error::io(&manifest_path, e)),
        _ => {}
    }
    write_obj(&dir.join(MESH_FILE), &scene.mesh)?;
    for (i, frame) in scene.vision_frames.frames().iter().enumerate() {
        write_ply(&dir.join(frame_file(i)), frame)?;
    }
    write_ply(&dir.join(TACTILE_FILE), &scene.tactile_cloud)?;
    write_ply(&dir.join(GT_SURFACE_FILE), &scene.gt_surface)?;
    let manifest = SceneManifest {
        id: scene.id.clone(),
        seed: scene.seed,
        spec: scene.spec.clone(),
        gt_pose: scene.gt_pose,
        frame_count: scene.vision_frames.len(),
        metadata: scene.metadata.clone(),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_atomic(&manifest_path, json.as_bytes())
}

/// Loads a scene directory. Without `require_tactile`, a missing
/// `tactile.ply` yields an empty tactile cloud.
pub fn load_scene(dir: &Path, require_tactile: bool) -> Result<GraspScene> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: SceneManifest =
        serde_json::from_str(&text).map_err(|e| Error::parse(&manifest_path, e.to_string()))?;
    let frames = (0..manifest.frame_count)
        .map(|i| read_ply(&dir.join(frame_file(i))))
        .collect::<Result<Vec<_>>>()?;
    let tactile_path = dir.join(TACTILE_FILE);
    let tactile_cloud = if !require_tactile && !tactile_path.exists() {
        LabeledPointCloud::empty()
    } else {
        read_ply(&tactile_path)?
    };
    Ok(GraspScene {
        id: manifest.id,
        spec: manifest.spec,
        seed: manifest.seed,
        mesh: read_obj(&dir.join(MESH_FILE))?,
        gt_pose: manifest.gt_pose,
        vision_frames: FrameSequence::new(frames)?,
        tactile_cloud,
        gt_surface: read_ply(&dir.join(GT_SURFACE_FILE))?,
        metadata: manifest.metadata,
    })
}

/// Loads `dir` itself when it holds a manifest, otherwise every
/// subdirectory that does, in name order. Subdirectories without a manifest
/// are skipped.
pub fn load_scenes(dir: &Path, require_tactile: bool) -> Result<Vec<GraspScene>> {
    if dir.join(MANIFEST_FILE).exists() {
        return Ok(vec![load_scene(dir, require_tactile)?]);
    }
    let mut dirs = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.join(MANIFEST_FILE).exists() {
            dirs.push(path);
        } else if path.is_dir() {
            log::warn!("skipping {}: no {MANIFEST_FILE}", path.display());
        }
    }
    dirs.sort();
    dirs.iter().map(|d| load_scene(d, require_tactile)).collect()
}
