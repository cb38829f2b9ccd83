//! Foundational geometry: points, rigid transforms, labelled clouds, meshes,
//! exact nearest-neighbour search, surface sampling and Hausdorff distance.

mod cloud;
mod hausdorff;
mod kdtree;
mod mesh;
mod sampling;
mod transform;

pub use cloud::{apply, LabeledPointCloud, Modality};
pub use hausdorff::{directed_hausdorff, hausdorff};
pub use kdtree::KdTree;
pub use mesh::TriMesh;
pub use sampling::{
    sample_mesh_surface, sample_surface_points, voxel_edge_for_density, voxel_key,
    SurfaceSample, STANDARD_DENSITY,
};
pub use transform::RigidTransform;

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
pub type Matrix3 = nalgebra::Matrix3<f64>;

/// Squared Euclidean distance, evaluated in a fixed order so every caller
/// (index, brute force, tests) gets bit-identical results.
#[inline]
pub fn dist2(a: &Point3, b: &Point3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub(crate) fn is_finite_point(p: &Point3) -> bool {
    p.x.is_finite() && p.y.is_finite() && p.z.is_finite()
}
