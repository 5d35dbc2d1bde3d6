//! Property tests over the geometric and loss invariants.

use articugeo_core::geometry::{rotation_error_frobenius, CameraModel, Pixel, SE3Transform};
use articugeo_core::linalg::{Mat3, Vec3};
use articugeo_core::losses::pe_map;
use articugeo_core::metrics::evaluate;
use articugeo_core::raster::{DepthMap, ImageBuffer, PixelMask};
use articugeo_core::sample::sample_image;
use proptest::prelude::*;

fn arb_rotation() -> impl Strategy<Value = Mat3<f64>> {
    (
        -1.0f64..1.0,
        -1.0f64..1.0,
        -1.0f64..1.0,
        0.0f64..std::f64::consts::PI,
    )
        .prop_filter_map("axis must not vanish", |(x, y, z, angle)| {
            Vec3::new(x, y, z)
                .normalized(1e-6)
                .map(|axis| Mat3::from_axis_angle(axis, angle))
        })
}

fn arb_se3() -> impl Strategy<Value = SE3Transform<f64>> {
    (arb_rotation(), -10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0)
        .prop_map(|(r, x, y, z)| SE3Transform::from_parts(r, Vec3::new(x, y, z)))
}

proptest! {
    #[test]
    fn se3_compose_inverse_identity(t in arb_se3()) {
        let round = t.compose(&t.inverse());
        prop_assert!(round.rotation.frobenius_distance_to_identity() < 1e-9);
        prop_assert!(round.translation.norm() < 1e-9);
        let double = t.inverse().inverse();
        prop_assert!(rotation_error_frobenius(&t, &double) < 1e-9);
    }

    #[test]
    fn se3_associativity(a in arb_se3(), b in arb_se3(), c in arb_se3()) {
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        prop_assert!(rotation_error_frobenius(&left, &right) < 1e-9);
        prop_assert!((left.translation - right.translation).norm() < 1e-9);
    }

    #[test]
    fn project_unproject_round_trip(
        u in 0.0f64..639.0,
        v in 0.0f64..479.0,
        depth in 0.1f64..80.0,
    ) {
        let cam = CameraModel::new(
            450.0, 470.0, 320.0, 240.0, 640, 480, SE3Transform::identity(),
        ).unwrap();
        let p = cam.unproject(Pixel::new(u, v), depth).unwrap();
        prop_assert_eq!(p.z, depth); // depth preserved exactly
        let (pix, d) = cam.project(p).unwrap();
        prop_assert!((pix.u - u).abs() < 1e-9 * depth.max(1.0));
        prop_assert!((pix.v - v).abs() < 1e-9 * depth.max(1.0));
        prop_assert!((d - depth).abs() < 1e-12);
    }

    #[test]
    fn bilinear_sampling_is_linear(
        values_a in proptest::collection::vec(0.0f64..1.0, 16),
        values_b in proptest::collection::vec(0.0f64..1.0, 16),
        alpha in 0.0f64..1.0,
        u in 0.0f64..2.9,
        v in 0.0f64..2.9,
    ) {
        let a = ImageBuffer::from_values(4, 4, 1, values_a.clone());
        let b = ImageBuffer::from_values(4, 4, 1, values_b.clone());
        let mixed_values: Vec<f64> = values_a
            .iter()
            .zip(&values_b)
            .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
            .collect();
        let mixed = ImageBuffer::from_values(4, 4, 1, mixed_values);
        let sa = sample_image(&a, u, v, 0).unwrap();
        let sb = sample_image(&b, u, v, 0).unwrap();
        let sm = sample_image(&mixed, u, v, 0).unwrap();
        prop_assert!((sm - (alpha * sa + (1.0 - alpha) * sb)).abs() < 1e-12);
    }

    #[test]
    fn photometric_error_nonnegative_and_zero_on_self(
        values in proptest::collection::vec(0.0f64..1.0, 36),
        offset in 0.0f64..0.5,
    ) {
        let x = ImageBuffer::from_values(6, 6, 1, values.clone());
        let shifted: Vec<f64> = values.iter().map(|v| (v + offset).min(1.0)).collect();
        let y = ImageBuffer::from_values(6, 6, 1, shifted);
        let mask = PixelMask::new(6, 6, true);
        for p in pe_map(&x, &x, &mask, 0.85).unwrap() {
            prop_assert!(p.abs() < 1e-12);
        }
        for p in pe_map(&x, &y, &mask, 0.85).unwrap() {
            prop_assert!(p > -1e-12);
        }
    }

    #[test]
    fn metric_deltas_monotone_on_any_input(
        gt_values in proptest::collection::vec(0.5f64..60.0, 25),
        pred_values in proptest::collection::vec(0.1f64..90.0, 25),
    ) {
        let gt = DepthMap::from_values(5, 5, gt_values);
        let pred = DepthMap::from_values(5, 5, pred_values);
        let r = evaluate(&pred, &gt, 100.0, false).unwrap();
        prop_assert!(r.delta1 <= r.delta2);
        prop_assert!(r.delta2 <= r.delta3);
        prop_assert!(r.delta3 <= 1.0);
        prop_assert!(r.abs_rel >= 0.0 && r.rmse >= 0.0);
    }

    #[test]
    fn depth_raster_io_round_trip(
        values in proptest::collection::vec(0.0f32..100.0, 12),
    ) {
        let dir = std::env::temp_dir().join("articugeo_prop_io");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("d_{:?}.dptf", std::thread::current().id()));
        let depth = DepthMap::from_values(4, 3, values.iter().map(|v| *v as f64).collect());
        articugeo_core::io::write_depth(&path, &depth).unwrap();
        let back = articugeo_core::io::read_depth(&path).unwrap();
        prop_assert_eq!(back.values, depth.values); // f32-representable: exact
    }
}
