use nalgebra::{Matrix4, Rotation3, Unit};
use serde::{Deserialize, Serialize};

use super::{Matrix3, Point3, Vector3};
use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-9;

/// Proper rigid motion `p ↦ R·p + t`, lengths in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3,
    translation: Vector3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Validates orthonormality and `det = +1` (both within 1e-9).
    pub fn new(rotation: Matrix3, translation: Vector3) -> Result<Self> {
        if !rotation.iter().all(|v| v.is_finite()) || !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite entry".into()));
        }
        let drift = orthonormality_drift(&rotation);
        if drift > ORTHO_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation is not orthonormal (‖RᵀR − I‖ = {drift:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidTransform(format!("det(R) = {det}")));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a transform from a rotation known to be proper up to rounding,
    /// projecting it back onto SO(3) when the drift exceeds 1e-9.
    pub fn from_rotation_projected(rotation: Matrix3, translation: Vector3) -> Self {
        let rotation = if orthonormality_drift(&rotation) > ORTHO_TOL
            || (rotation.determinant() - 1.0).abs() > ORTHO_TOL
        {
            project_to_rotation(&rotation)
        } else {
            rotation
        };
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vector3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation of `angle_deg` about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vector3, angle_deg: f64, translation: Vector3) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle_deg.to_radians());
        Self {
            rotation: *rot.matrix(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3 {
        &self.translation
    }

    /// `self ∘ inner`: applies `inner` first, then `self`.
    pub fn compose(&self, inner: &RigidTransform) -> RigidTransform {
        RigidTransform::from_rotation_projected(
            self.rotation * inner.rotation,
            self.rotation * inner.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    #[inline]
    pub fn transform_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    #[inline]
    pub fn transform_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Row-major 4×4 homogeneous matrix.
    pub fn to_row_major(&self) -> [[f64; 4]; 4] {
        let m = self.to_matrix4();
        let mut out = [[0.0; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[(r, c)];
            }
        }
        out
    }

    pub fn from_row_major(m: &[[f64; 4]; 4]) -> Result<Self> {
        if m[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::InvalidTransform(
                "bottom row must be [0 0 0 1]".into(),
            ));
        }
        let rotation = Matrix3::from_fn(|r, c| m[r][c]);
        let translation = Vector3::new(m[0][3], m[1][3], m[2][3]);
        Self::new(rotation, translation)
    }

    /// Geodesic angle of `selfᵀ·other` in degrees, in `[0, 180]`.
    pub fn rotation_angle_to_deg(&self, other: &RigidTransform) -> f64 {
        rotation_angle_deg(&(self.rotation.transpose() * other.rotation))
    }
}

/// Angle of a rotation matrix in degrees, in `[0, 180]`.
pub(crate) fn rotation_angle_deg(r: &Matrix3) -> f64 {
    // acos is ill-conditioned near 0 and π, so use atan2 on the axis/trace parts.
    let sin_part = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    )
    .norm()
        * 0.5;
    let cos_part = (r.trace() - 1.0) * 0.5;
    sin_part.atan2(cos_part).to_degrees()
}

fn orthonormality_drift(r: &Matrix3) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Nearest proper rotation (polar projection through the SVD).
fn project_to_rotation(m: &Matrix3) -> Matrix3 {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Matrix3::identity(),
    };
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    u * d * v_t
}

/// Row-major serialisation used by scene manifests.
impl Serialize for RigidTransform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RigidTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = <[[f64; 4]; 4]>::deserialize(d)?;
        RigidTransform::from_row_major(&m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rz(deg: f64) -> RigidTransform {
        RigidTransform::from_axis_angle(Vector3::z(), deg, Vector3::zeros())
    }

    #[test]
    fn compose_with_identity() {
        let t = RigidTransform::from_axis_angle(Vector3::new(1.0, 2.0, 0.5), 33.0, Vector3::new(4.0, -1.0, 2.0));
        let c = RigidTransform::identity().compose(&t);
        assert!((c.rotation - t.rotation).norm() < 1e-15);
        assert!((c.translation - t.translation).norm() < 1e-15);
    }

    #[test]
    fn compose_quarter_turns() {
        let c = rz(90.0).compose(&rz(90.0));
        let expected = Matrix3::new(-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0);
        assert!((c.rotation - expected).norm() < 1e-12);
        assert_eq!(c.translation, Vector3::zeros());
    }

    #[test]
    fn compose_with_inverse_by_hand() {
        // Rz(37°), t = (1,2,3); hand-multiplied 4×4 entries.
        let (s, c) = 37f64.to_radians().sin_cos();
        let t = RigidTransform::from_axis_angle(Vector3::z(), 37.0, Vector3::new(1.0, 2.0, 3.0));
        let m = t.to_row_major();
        assert!((m[0][0] - c).abs() < 1e-12 && (m[0][1] + s).abs() < 1e-12);
        assert!((m[1][0] - s).abs() < 1e-12 && (m[1][1] - c).abs() < 1e-12);
        // Inverse translation is −Rᵀt.
        let inv = t.inverse();
        let expected_t = Vector3::new(-(c * 1.0 + s * 2.0), -(-s * 1.0 + c * 2.0), -3.0);
        assert!((inv.translation - expected_t).norm() < 1e-12);
        let id = t.compose(&inv);
        assert!((id.to_matrix4() - Matrix4::identity()).norm() < 1e-9);
    }

    #[test]
    fn apply_quarter_turn() {
        let p = rz(90.0).transform_point(&Point3::new(1.0, 0.0, 0.0));
        assert!((p - Point3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_reflection_and_skew() {
        let refl = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(refl, Vector3::zeros()).is_err());
        let skew = Matrix3::new(1.0, 1e-6, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(RigidTransform::new(skew, Vector3::zeros()).is_err());
    }

    #[test]
    fn projection_repairs_drift() {
        let mut r = *rz(20.0).rotation();
        r[(0, 1)] += 1e-6;
        let t = RigidTransform::from_rotation_projected(r, Vector3::zeros());
        assert!(RigidTransform::new(*t.rotation(), Vector3::zeros()).is_ok());
    }

    #[test]
    fn rotation_angle_extremes() {
        assert_eq!(rz(0.0).rotation_angle_to_deg(&rz(0.0)), 0.0);
        assert!((rz(0.0).rotation_angle_to_deg(&rz(180.0)) - 180.0).abs() < 1e-9);
        assert!((rz(10.0).rotation_angle_to_deg(&rz(-25.0)) - 35.0).abs() < 1e-9);
    }

    #[test]
    fn row_major_round_trip() {
        let t = RigidTransform::from_axis_angle(Vector3::new(0.3, -1.0, 0.2), 71.0, Vector3::new(5.0, 6.0, -7.0));
        let back = RigidTransform::from_row_major(&t.to_row_major()).unwrap();
        assert_eq!(back, t);
    }

    fn arb_transform() -> impl Strategy<Value = RigidTransform> {
        (
            prop::array::uniform3(-1.0f64..1.0),
            -180.0f64..180.0,
            prop::array::uniform3(-100.0f64..100.0),
        )
            .prop_filter_map("zero axis", |(a, ang, t)| {
                let axis = Vector3::from(a);
                (axis.norm() > 1e-3)
                    .then(|| RigidTransform::from_axis_angle(axis, ang, Vector3::from(t)))
            })
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in arb_transform(), b in arb_transform(), c in arb_transform()) {
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            prop_assert!((l.to_matrix4() - r.to_matrix4()).norm() < 1e-9);
        }

        #[test]
        fn preserves_distances(t in arb_transform(),
                               p in prop::array::uniform3(-100.0f64..100.0),
                               q in prop::array::uniform3(-100.0f64..100.0)) {
            let (p, q) = (Point3::from(p), Point3::from(q));
            let d0 = (p - q).norm();
            let d1 = (t.transform_point(&p) - t.transform_point(&q)).norm();
            prop_assert!((d0 - d1).abs() < 1e-9);
        }

        #[test]
        fn rotation_error_is_symmetric(a in arb_transform(), b in arb_transform()) {
            prop_assert!((a.rotation_angle_to_deg(&b) - b.rotation_angle_to_deg(&a)).abs() < 1e-9);
        }
    }
}
