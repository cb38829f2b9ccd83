use rayon::prelude::*;

use super::icp::{icp_weighted_indexed, IcpParams, RegistrationResult};
use crate::error::{Error, Result};
use crate::geometry::{KdTree, LabeledPointCloud, Matrix3, Point3, RigidTransform, Vector3};

/// The 24 proper rotations of the cube: signed permutation matrices with
/// determinant +1. Index 0 is the identity.
pub fn cube_rotations() -> Vec<Matrix3> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0..8u8 {
            let mut m = Matrix3::zeros();
            for (row, &col) in perm.iter().enumerate() {
                m[(row, col)] = if signs & (1 << row) == 0 { 1.0 } else { -1.0 };
            }
            if m.determinant() > 0.0 {
                out.push(m);
            }
        }
    }
    out
}

/// Initial transforms: each cube rotation about the weighted source centroid,
/// translated so that centroid lands on the target centroid.
pub fn start_transforms(source: &LabeledPointCloud, target_centroid: &Point3) -> Result<Vec<RigidTransform>> {
    let c = source.weighted_centroid().ok_or(Error::EmptyCloud)?;
    Ok(cube_rotations()
        .into_iter()
        .map(|r| RigidTransform::from_rotation_projected(r, target_centroid.coords - r * c.coords))
        .collect())
}

/// Runs weighted ICP from all 24 starts and keeps the lowest correspondence
/// error; ties go to the lowest start index. Starts run in parallel, and the
/// selection does not depend on completion order.
pub fn multi_start(
    source: &LabeledPointCloud,
    target: &LabeledPointCloud,
    params: &IcpParams,
) -> Result<RegistrationResult> {
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let centroid = Point3::from(
        target.points().iter().fold(Vector3::zeros(), |a, p| a + p.coords) / target.len() as f64,
    );
    multi_start_indexed(source, &KdTree::new(target.points()), &centroid, params)
}

/// [`multi_start`] with a prebuilt target index and centroid.
pub fn multi_start_indexed(
    source: &LabeledPointCloud,
    target: &KdTree,
    target_centroid: &Point3,
    params: &IcpParams,
) -> Result<RegistrationResult> {
    select_best(multi_start_runs(source, target, target_centroid, params)?)
}

/// Every start's outcome, in start order.
pub fn multi_start_runs(
    source: &LabeledPointCloud,
    target: &KdTree,
    target_centroid: &Point3,
    params: &IcpParams,
) -> Result<Vec<Result<RegistrationResult>>> {
    params.validate()?;
    let starts = start_transforms(source, target_centroid)?;
    Ok(starts
        .par_iter()
        .enumerate()
        .map(|(k, init)| {
            icp_weighted_indexed(source, target, init, params).map(|mut r| {
                r.init_index = k;
                r
            })
        })
        .collect())
}

/// Lowest correspondence error wins; ties go to the earliest run.
pub fn select_best(runs: Vec<Result<RegistrationResult>>) -> Result<RegistrationResult> {
    let mut best: Option<RegistrationResult> = None;
    let mut last_err = None;
    for run in runs {
        match run {
            Ok(r) => {
                if best
                    .as_ref()
                    .is_none_or(|b| r.correspondence_error < b.correspondence_error)
                {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| Error::AllStartsFailed(Box::new(last_err.unwrap_or(Error::EmptyCloud))))
}
