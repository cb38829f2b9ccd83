use super::{KdTree, LabeledPointCloud, Point3};
use crate::error::{Error, Result};

/// `max_{p∈from} min_{q∈to} ‖p − q‖` using a prebuilt index over `to`.
pub fn directed_hausdorff(from: &[Point3], to: &KdTree) -> f64 {
    from.iter()
        .filter_map(|p| to.nearest_sq(p).map(|(_, d2)| d2))
        .fold(0.0f64, f64::max)
        .sqrt()
}

/// Symmetric Hausdorff distance between two nonempty clouds.
pub fn hausdorff(a: &LabeledPointCloud, b: &LabeledPointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let ta = KdTree::new(a.points());
    let tb = KdTree::new(b.points());
    Ok(directed_hausdorff(a.points(), &tb).max(directed_hausdorff(b.points(), &ta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Modality;

    fn cloud(pts: &[[f64; 3]]) -> LabeledPointCloud {
        LabeledPointCloud::uniform(pts.iter().map(|&p| Point3::from(p)).collect(), Modality::Model, 1.0)
            .unwrap()
    }

    #[test]
    fn self_distance_is_zero() {
        let c = cloud(&[[0.0, 1.0, 2.0], [3.0, -1.0, 0.5]]);
        assert_eq!(hausdorff(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn single_pair() {
        assert_eq!(hausdorff(&cloud(&[[0.0; 3]]), &cloud(&[[3.0, 4.0, 0.0]])).unwrap(), 5.0);
    }

    #[test]
    fn asymmetric_sets() {
        let a = cloud(&[[0.0; 3], [10.0, 0.0, 0.0]]);
        let b = cloud(&[[0.0; 3]]);
        assert_eq!(hausdorff(&a, &b).unwrap(), 10.0);
        assert_eq!(hausdorff(&b, &a).unwrap(), 10.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(hausdorff(&cloud(&[]), &cloud(&[[0.0; 3]])), Err(Error::EmptyCloud)));
    }
}
