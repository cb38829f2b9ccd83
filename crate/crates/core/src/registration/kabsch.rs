use crate::error::{Error, Result};
use crate::geometry::{Matrix3, Point3, RigidTransform, Vector3};

/// Relative singular-value threshold below which `H` is treated as rank-deficient.
const RANK_TOL: f64 = 1e-12;

/// Weighted least-squares rigid transform mapping `source[i]` onto `target[i]`.
///
/// Weights are normalised to sum to one, the weighted centroids `ā`, `b̄` are
/// removed, and the weighted cross-covariance `H = Σ wᵢ (aᵢ − ā)(bᵢ − b̄)ᵀ` is
/// decomposed as `U S Vᵀ`. The rotation is `V Uᵀ`, with the column of `V` for
/// the smallest singular value negated when that product is a reflection. The
/// translation is `b̄ − R ā`.
pub fn weighted_kabsch(source: &[Point3], target: &[Point3], weights: &[f64]) -> Result<RigidTransform> {
    if source.len() != target.len() {
        return Err(Error::LengthMismatch(source.len(), target.len()));
    }
    if source.len() != weights.len() {
        return Err(Error::LengthMismatch(source.len(), weights.len()));
    }
    if source.len() < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least 3 correspondences, got {}",
            source.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }

    let mut ca = Vector3::zeros();
    let mut cb = Vector3::zeros();
    for ((a, b), &w) in source.iter().zip(target).zip(weights) {
        let w = w / total;
        ca += a.coords * w;
        cb += b.coords * w;
    }
    let mut h = Matrix3::zeros();
    for ((a, b), &w) in source.iter().zip(target).zip(weights) {
        if w == 0.0 {
            continue;
        }
        h += ((a.coords - ca) * (w / total)) * (b.coords - cb).transpose();
    }

    let svd = h.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateConfiguration("SVD did not converge".into())),
    };
    let s = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let (largest, middle, smallest) = (s[order[0]], s[order[1]], order[2]);
    if !(largest > 0.0) || middle <= RANK_TOL * largest {
        return Err(Error::DegenerateConfiguration(format!(
            "cross-covariance has rank < 2 (singular values {:.3e}, {:.3e}, {:.3e})",
            s[order[0]], s[order[1]], s[order[2]]
        )));
    }

    let mut v = v_t.transpose();
    if (v * u.transpose()).determinant() < 0.0 {
        let col = -v.column(smallest);
        v.set_column(smallest, &col);
    }
    let r = v * u.transpose();
    let t = cb - r * ca;
    Ok(RigidTransform::from_rotation_projected(r, t))
}
