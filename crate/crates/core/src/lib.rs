//! Weighted visuo-tactile point-cloud registration for in-hand object pose
//! estimation.
//!
//! The pipeline mirrors a physical grasp-and-estimate setup:
//!
//! 1. [`preprocess`]: condition raw sensor clouds (voxel downsampling,
//!    statistical outlier removal, temporal averaging, modality segmentation).
//! 2. [`fusion`]: attach per-modality weights, concatenate vision and tactile
//!    clouds, and compute cloud metrics (occlusion, noise, count, volume).
//! 3. [`registration`]: weighted ICP against a cloud sampled from the object
//!    mesh, restarted from the 24 axis-aligned orientations.
//! 4. [`eval`]: pose/object errors, success classification, Pearson statistics,
//!    weight sweeps and the benchmark runner.
//!
//! [`synth`] replaces the hardware with procedural shapes, a ray-cast depth
//! camera with controllable occlusion, and tactile contact patches.
//!
//! All lengths are millimetres and all angles are degrees.

pub mod config;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod preprocess;
pub mod registration;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    hausdorff, sample_mesh_surface, KdTree, LabeledPointCloud, Modality, Point3, RigidTransform,
    TriMesh, Vector3,
};
