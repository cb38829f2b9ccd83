use serde::{Deserialize, Serialize};

use super::{is_finite_point, Point3, RigidTransform};
use crate::error::{Error, Result};

/// Which sensor produced a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Vision,
    Tactile,
    Model,
}

impl Modality {
    /// PLY `modality` property code.
    pub fn code(self) -> u8 {
        match self {
            Modality::Vision => 0,
            Modality::Tactile => 1,
            Modality::Model => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Modality::Vision),
            1 => Some(Modality::Tactile),
            2 => Some(Modality::Model),
            _ => None,
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modality::Vision => "vision",
            Modality::Tactile => "tactile",
            Modality::Model => "model",
        })
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vision" => Ok(Modality::Vision),
            "tactile" => Ok(Modality::Tactile),
            "model" => Ok(Modality::Model),
            _ => Err(Error::InvalidParameter(format!("unknown modality `{s}`"))),
        }
    }
}

/// Points with a per-point modality label and non-negative weight.
///
/// The three columns always have equal length; every coordinate is finite and
/// every weight is finite and `>= 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledPointCloud {
    points: Vec<Point3>,
    labels: Vec<Modality>,
    weights: Vec<f64>,
}

impl LabeledPointCloud {
    pub fn new(points: Vec<Point3>, labels: Vec<Modality>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch(points.len(), labels.len()));
        }
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch(points.len(), weights.len()));
        }
        if let Some(i) = points.iter().position(|p| !is_finite_point(p)) {
            return Err(Error::InvalidCloud(format!("point {i} is not finite")));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidCloud(format!(
                "weight {i} = {} is negative or not finite",
                weights[i]
            )));
        }
        Ok(Self {
            points,
            labels,
            weights,
        })
    }

    /// Every point gets the same label and weight.
    pub fn uniform(points: Vec<Point3>, label: Modality, weight: f64) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![label; n], vec![weight; n])
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn labels(&self) -> &[Modality] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point3, Modality, f64)> + '_ {
        self.points
            .iter()
            .zip(self.labels.iter().copied())
            .zip(self.weights.iter().copied())
            .map(|((p, l), w)| (p, l, w))
    }

    pub fn into_parts(self) -> (Vec<Point3>, Vec<Modality>, Vec<f64>) {
        (self.points, self.labels, self.weights)
    }

    /// Appends `other` after `self`.
    pub fn concat(&self, other: &LabeledPointCloud) -> LabeledPointCloud {
        let mut out = self.clone();
        out.points.extend_from_slice(&other.points);
        out.labels.extend_from_slice(&other.labels);
        out.weights.extend_from_slice(&other.weights);
        out
    }

    /// Keeps the points for which `keep(index)` holds, preserving order.
    pub fn filter_indices(&self, mut keep: impl FnMut(usize) -> bool) -> LabeledPointCloud {
        let mut out = LabeledPointCloud::default();
        for i in 0..self.len() {
            if keep(i) {
                out.points.push(self.points[i]);
                out.labels.push(self.labels[i]);
                out.weights.push(self.weights[i]);
            }
        }
        out
    }

    /// Replaces the weights; labels and geometry unchanged.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<LabeledPointCloud> {
        Self::new(self.points.clone(), self.labels.clone(), weights)
    }

    /// Maps every point through `t`; labels and weights unchanged.
    pub fn transformed(&self, t: &RigidTransform) -> LabeledPointCloud {
        LabeledPointCloud {
            points: self.points.iter().map(|p| t.transform_point(p)).collect(),
            labels: self.labels.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Weighted centroid; falls back to the plain mean when all weights are 0.
    pub fn weighted_centroid(&self) -> Option<Point3> {
        if self.is_empty() {
            return None;
        }
        let total = self.total_weight();
        if total > 0.0 {
            let sum = self
                .iter()
                .fold(nalgebra::Vector3::zeros(), |acc, (p, _, w)| acc + p.coords * w);
            Some(Point3::from(sum / total))
        } else {
            let sum = self
                .points
                .iter()
                .fold(nalgebra::Vector3::zeros(), |acc, p| acc + p.coords);
            Some(Point3::from(sum / self.len() as f64))
        }
    }
}

/// `apply(transform, cloud)`: each point mapped to `R·p + t`.
pub fn apply(transform: &RigidTransform, cloud: &LabeledPointCloud) -> LabeledPointCloud {
    cloud.transformed(transform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector3;

    #[test]
    fn rejects_bad_columns() {
        let p = vec![Point3::origin()];
        assert!(matches!(
            LabeledPointCloud::new(p.clone(), vec![], vec![1.0]),
            Err(Error::LengthMismatch(1, 0))
        ));
        assert!(LabeledPointCloud::new(p.clone(), vec![Modality::Vision], vec![-1.0]).is_err());
        assert!(LabeledPointCloud::new(p, vec![Modality::Vision], vec![f64::NAN]).is_err());
        let bad = vec![Point3::new(f64::INFINITY, 0.0, 0.0)];
        assert!(LabeledPointCloud::uniform(bad, Modality::Vision, 1.0).is_err());
    }

    #[test]
    fn apply_identity_and_translation() {
        let c = LabeledPointCloud::new(
            vec![Point3::origin(), Point3::new(1.0, 2.0, 3.0)],
            vec![Modality::Vision, Modality::Tactile],
            vec![1.0, 2.5],
        )
        .unwrap();
        assert_eq!(apply(&RigidTransform::identity(), &c), c);
        let t = RigidTransform::from_translation(Vector3::new(10.0, 0.0, 0.0));
        let moved = apply(&t, &c);
        assert_eq!(moved.points()[0], Point3::new(10.0, 0.0, 0.0));
        assert_eq!(moved.labels(), c.labels());
        assert_eq!(moved.weights(), c.weights());
    }

    #[test]
    fn modality_codes_round_trip() {
        for m in [Modality::Vision, Modality::Tactile, Modality::Model] {
            assert_eq!(Modality::from_code(m.code()), Some(m));
            assert_eq!(m.to_string().parse::<Modality>().unwrap(), m);
        }
        assert_eq!(Modality::from_code(3), None);
    }
}
