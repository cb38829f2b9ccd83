//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vtpose::{LabeledPointCloud, Modality, Point3, RigidTransform};

/// Unweighted least-squares rigid alignment by Horn's unit-quaternion
/// method: the rotation is the top eigenvector of a 4×4 symmetric matrix
/// built from the cross-covariance. No SVD and no weights involved.
pub fn horn_align(source: &[Point3], target: &[Point3]) -> RigidTransform {
    assert_eq!(source.len(), target.len());
    let n = source.len() as f64;
    let ca = source.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / n;
    let cb = target.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / n;
    let mut s = Matrix3::<f64>::zeros();
    for (a, b) in source.iter().zip(target) {
        s += (a.coords - ca) * (b.coords - cb).transpose();
    }
    let (sxx, sxy, sxz) = (s[(0, 0)], s[(0, 1)], s[(0, 2)]);
    let (syx, syy, syz) = (s[(1, 0)], s[(1, 1)], s[(1, 2)]);
    let (szx, szy, szz) = (s[(2, 0)], s[(2, 1)], s[(2, 2)]);
    #[rustfmt::skip]
    let nmat = Matrix4::new(
        sxx + syy + szz, syz - szy,       szx - sxz,        sxy - syx,
        syz - szy,       sxx - syy - szz, sxy + syx,        szx + sxz,
        szx - sxz,       sxy + syx,       -sxx + syy - szz, syz + szy,
        sxy - syx,       szx + sxz,       syz + szy,        -sxx - syy + szz,
    );
    let eig = SymmetricEigen::new(nmat);
    let k = eig.eigenvalues.imax();
    let q = eig.eigenvectors.column(k);
    let rot = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
    let r = *rot.to_rotation_matrix().matrix();
    RigidTransform::new(r, cb - r * ca).unwrap()
}

/// Index and squared distance of the nearest target point by linear scan;
/// ties go to the lowest index.
pub fn brute_nearest(target: &[Point3], q: &Point3) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, p) in target.iter().enumerate() {
        let d = vtpose::geometry::dist2(p, q);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Textbook unweighted point-to-point ICP with the same stopping rule as
/// the library. Returns the transform after every iteration and the RMSE
/// history (initial value first).
pub fn reference_icp(
    source: &[Point3],
    target: &[Point3],
    init: RigidTransform,
    max_iterations: usize,
    tol: f64,
) -> (Vec<RigidTransform>, Vec<f64>) {
    let matches = |t: &RigidTransform| -> (Vec<Point3>, f64) {
        let mut corr = Vec::with_capacity(source.len());
        let mut sum = 0.0;
        for p in source {
            let (j, d2) = brute_nearest(target, &t.transform_point(p));
            corr.push(target[j]);
            sum += d2;
        }
        (corr, (sum / source.len() as f64).sqrt())
    };
    let (mut corr, mut rmse) = matches(&init);
    let mut history = vec![rmse];
    let mut transforms = Vec::new();
    for _ in 0..max_iterations {
        let t = horn_align(source, &corr);
        transforms.push(t);
        let (next, next_rmse) = matches(&t);
        history.push(next_rmse);
        let prev = rmse;
        corr = next;
        rmse = next_rmse;
        if rmse <= 1e-12 || (prev - rmse).abs() / prev.max(1e-12) < tol {
            break;
        }
    }
    (transforms, history)
}

pub fn max_entry_diff(a: &RigidTransform, b: &RigidTransform) -> f64 {
    (a.to_matrix4() - b.to_matrix4()).abs().max()
}

pub fn rotation_error_deg(a: &RigidTransform, b: &RigidTransform) -> f64 {
    a.rotation_angle_to_deg(b)
}

pub fn random_transform(rng: &mut impl Rng, max_translation: f64) -> RigidTransform {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let axis = if axis.norm() < 1e-3 { Vector3::z() } else { axis };
    let t = Vector3::from_fn(|_, _| rng.random_range(-max_translation..max_translation));
    RigidTransform::from_axis_angle(axis, rng.random_range(0.0..180.0), t)
}

pub fn random_points(rng: &mut impl Rng, n: usize, half_extent: f64) -> Vec<Point3> {
    (0..n)
        .map(|_| Point3::from(Vector3::from_fn(|_, _| rng.random_range(-half_extent..half_extent))))
        .collect()
}

/// Points on three boxes of an asymmetric "chair".
pub fn chair(seed: u64, n: usize) -> LabeledPointCloud {
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

/// Repository directory holding the curated regression scenes.
pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}
