mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vtpose::registration::{icp_weighted, multi_start, start_transforms, weighted_kabsch, IcpParams};
use vtpose::synth::{generate_shape, ShapeSpec};
use vtpose::{sample_mesh_surface, LabeledPointCloud, Point3, RigidTransform, Vector3};

fn sl_block_clouds() -> (LabeledPointCloud, LabeledPointCloud) {
    let mesh = generate_shape(&ShapeSpec::sl_block()).unwrap();
    let model = sample_mesh_surface(&mesh, 1.0, 11).unwrap();
    let sensor = sample_mesh_surface(&mesh, 1.0, 12).unwrap();
    (model, sensor)
}

#[test]
fn equal_weights_follow_the_unweighted_reference_at_every_iteration() {
    let target = chair(1, 600);
    let perturb = RigidTransform::from_axis_angle(Vector3::new(0.2, 1.0, -0.4), 12.0, Vector3::new(3.0, -2.0, 4.0));
    let source_pts: Vec<Point3> = chair(2, 200).points().iter().map(|p| perturb.transform_point(p)).collect();
    let (ref_transforms, ref_history) = reference_icp(&source_pts, target.points(), RigidTransform::identity(), 30, 1e-9);
    assert!(ref_transforms.len() >= 3);

    for weight in [1.0, 0.37] {
        let source = LabeledPointCloud::uniform(source_pts.clone(), vtpose::Modality::Vision, weight).unwrap();
        for (k, expected) in ref_transforms.iter().enumerate() {
            let params = IcpParams {
                max_iterations: k + 1,
                rel_rmse_tolerance: 1e-9,
                ..IcpParams::default()
            };
            let r = icp_weighted(&source, &target, &RigidTransform::identity(), &params).unwrap();
            assert_eq!(r.iterations, k + 1);
            let diff = max_entry_diff(&r.transform, expected);
            assert!(diff < 1e-9, "iteration {} differs by {diff}", k + 1);
            for (a, b) in r.rmse_history.iter().zip(&ref_history) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn aligned_source_is_kept_by_the_identity_start() {
    let target = chair(3, 400);
    let source = target.filter_indices(|i| i % 2 == 0);
    let r = multi_start(&source, &target, &IcpParams::default()).unwrap();
    assert!(r.final_rmse < 1e-9);
    assert!(rotation_error_deg(&r.transform, &RigidTransform::identity()) < 1e-6);
    assert!(r.transform.translation().norm() < 1e-9);
    assert_eq!(r.init_index, 0);
}

#[test]
fn half_turn_needs_the_multi_start() {
    let (model, sensor) = sl_block_clouds();
    let pose = RigidTransform::from_axis_angle(Vector3::z(), 180.0, Vector3::new(4.0, -3.0, 2.0));
    let source = sensor.transformed(&pose);
    let expected = pose.inverse();
    let params = IcpParams::default();

    let best = multi_start(&source, &model, &params).unwrap();
    assert!(rotation_error_deg(&best.transform, &expected) < 0.5);
    let centre = Point3::origin();
    let moved = (best.transform.transform_point(&pose.transform_point(&centre)) - centre).norm();
    assert!(moved < 0.5, "translation error {moved}");

    let single = icp_weighted(&source, &model, &RigidTransform::identity(), &params).unwrap();
    assert!(rotation_error_deg(&single.transform, &expected) > 90.0);
    let centred = start_transforms(&source, &Point3::origin()).unwrap()[0];
    let single = icp_weighted(&source, &model, &centred, &params).unwrap();
    assert!(rotation_error_deg(&single.transform, &expected) > 90.0);
}

#[test]
fn scaling_every_weight_leaves_multi_start_unchanged() {
    let (model, sensor) = sl_block_clouds();
    let pose = RigidTransform::from_axis_angle(Vector3::new(1.0, 2.0, 0.5), 75.0, Vector3::new(-6.0, 1.0, 9.0));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let weights: Vec<f64> = (0..sensor.len()).map(|_| rand::Rng::random_range(&mut rng, 0.1..5.0)).collect();
    let source = sensor.transformed(&pose).with_weights(weights.clone()).unwrap();
    let scaled = source.with_weights(weights.iter().map(|w| 7.0 * w).collect()).unwrap();
    let a = multi_start(&source, &model, &IcpParams::default()).unwrap();
    let b = multi_start(&scaled, &model, &IcpParams::default()).unwrap();
    assert_eq!(a.init_index, b.init_index);
    assert!(max_entry_diff(&a.transform, &b.transform) < 1e-9);
    assert!((a.final_rmse - b.final_rmse).abs() < 1e-9);
}

#[test]
fn multi_start_is_bit_for_bit_deterministic() {
    let (model, sensor) = sl_block_clouds();
    let source = sensor.transformed(&RigidTransform::from_axis_angle(Vector3::x(), 130.0, Vector3::zeros()));
    let a = multi_start(&source, &model, &IcpParams::default()).unwrap();
    let b = multi_start(&source, &model, &IcpParams::default()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kabsch_with_constant_weights_matches_horn(seed in any::<u64>(), n in 3usize..40, w in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_points(&mut rng, n, 20.0);
        let b = random_points(&mut rng, n, 20.0);
        let k = weighted_kabsch(&a, &b, &vec![w; n]).unwrap();
        let h = horn_align(&a, &b);
        prop_assert!(max_entry_diff(&k, &h) < 1e-8, "{}", max_entry_diff(&k, &h));
    }

    #[test]
    fn kabsch_is_weight_scale_invariant(seed in any::<u64>(), n in 3usize..30, c in 0.001f64..1000.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_points(&mut rng, n, 20.0);
        let t = random_transform(&mut rng, 30.0);
        let b: Vec<Point3> = a.iter().map(|p| t.transform_point(p) + Vector3::from_fn(|_, _| rand::Rng::random_range(&mut rng, -0.5..0.5))).collect();
        let w: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.1..3.0)).collect();
        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        let k1 = weighted_kabsch(&a, &b, &w).unwrap();
        let k2 = weighted_kabsch(&a, &b, &scaled).unwrap();
        prop_assert!(max_entry_diff(&k1, &k2) < 1e-9);
    }

    #[test]
    fn icp_is_weight_scale_invariant(seed in 0u64..1000, c in 0.01f64..100.0) {
        let target = chair(seed, 300);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pose = RigidTransform::from_axis_angle(Vector3::new(0.3, -0.2, 1.0), 8.0, Vector3::new(2.0, 1.0, -1.0));
        let source = chair(seed + 1, 120).transformed(&pose);
        let w: Vec<f64> = (0..source.len()).map(|_| rand::Rng::random_range(&mut rng, 0.1..3.0)).collect();
        let a = icp_weighted(&source.with_weights(w.clone()).unwrap(), &target, &RigidTransform::identity(), &IcpParams::default()).unwrap();
        let b = icp_weighted(&source.with_weights(w.iter().map(|x| x * c).collect()).unwrap(), &target, &RigidTransform::identity(), &IcpParams::default()).unwrap();
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert!(max_entry_diff(&a.transform, &b.transform) < 1e-9);
    }
}
