//! Property-based invariants of the geometric primitives.

use polyproj::geometry::{
    affine_dependence_vector, best_affine_dependence, max_orthogonality_defect, project_affine_hull,
};
use polyproj::PointCloud;
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    (-1000i64..=1000).prop_map(|v| v as f64 / 100.0)
}

fn cloud_strategy(d: usize, max_len: usize) -> impl Strategy<Value = PointCloud<f64>> {
    prop::collection::vec(coord(), d * 2..=d * max_len).prop_map(move |mut data| {
        data.truncate(data.len() / d * d);
        PointCloud::new(d, data).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diameter_is_permutation_invariant(cloud in cloud_strategy(3, 8), rot in 0usize..8) {
        let mut rows: Vec<Vec<f64>> = cloud.iter_points().map(|p| p.to_vec()).collect();
        let k = rot % rows.len();
        rows.rotate_left(k);
        let permuted = PointCloud::from_rows(&rows).unwrap();
        prop_assert_eq!(cloud.diameter(), permuted.diameter());
    }

    #[test]
    fn diameter_scales_linearly(cloud in cloud_strategy(2, 8), scale in 1u32..50) {
        let s = scale as f64 / 7.0;
        let rows: Vec<Vec<f64>> = cloud
            .iter_points()
            .map(|p| p.iter().map(|c| c * s).collect())
            .collect();
        let scaled = PointCloud::from_rows(&rows).unwrap();
        let expected = s * cloud.diameter();
        prop_assert!((scaled.diameter() - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn affine_projection_residual_is_orthogonal(
        cloud in cloud_strategy(3, 4),
        target in prop::collection::vec(coord(), 3),
    ) {
        let indices: Vec<usize> = (0..cloud.len()).collect();
        let proj = project_affine_hull(&indices, &cloud, &target).unwrap();
        let scale = cloud
            .iter_points()
            .map(|p| p.iter().map(|c| c * c).sum::<f64>())
            .fold(1.0f64, f64::max)
            .max(target.iter().map(|c| c * c).sum());
        let defect = max_orthogonality_defect(&indices, &cloud, &target, &proj.point);
        prop_assert!(defect <= 1e-9 * scale, "defect {} at scale {}", defect, scale);
        let beta_sum: f64 = proj.beta.iter().sum();
        prop_assert!((beta_sum - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn constructed_dependent_quadruple_has_tiny_residual(
        tri in prop::collection::vec(coord(), 6),
        wa in 1u32..100,
        wb in 1u32..100,
        wc in 1u32..100,
    ) {
        // Fourth point as a convex combination of an affinely independent
        // triple; the quadruple is affinely dependent by construction.
        let a = [tri[0], tri[1]];
        let b = [tri[2], tri[3]];
        let c = [tri[4], tri[5]];
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        prop_assume!(area.abs() > 1e-3);
        let total = (wa + wb + wc) as f64;
        let (wa, wb, wc) = (wa as f64 / total, wb as f64 / total, wc as f64 / total);
        let mix = [
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
        ];
        let cloud = PointCloud::from_rows(&[a.to_vec(), b.to_vec(), c.to_vec(), mix.to_vec()])
            .unwrap();
        let dep = best_affine_dependence(&[0, 1, 2, 3], &cloud).unwrap();
        prop_assert!(dep.residual <= 1e-10, "residual {}", dep.residual);
    }

    #[test]
    fn dependence_vector_sums_to_zero(cloud in cloud_strategy(2, 5)) {
        let indices: Vec<usize> = (0..cloud.len()).collect();
        prop_assume!(indices.len() >= 2);
        let dep = affine_dependence_vector(&indices, &cloud, indices[0]).unwrap();
        // Pivot entry is the exact negation of the float sum of the rest.
        let others: f64 = dep
            .gamma
            .iter()
            .enumerate()
            .filter(|(pos, _)| *pos != dep.pivot_pos)
            .map(|(_, g)| *g)
            .sum();
        prop_assert_eq!(others + dep.gamma[dep.pivot_pos], 0.0);
    }
}
