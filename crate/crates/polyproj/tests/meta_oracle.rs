//! Meta-algorithm correctness against the full-cloud enumeration oracle,
//! decay and no-repeat audits, and the approximate-optimality bounds in
//! both directions.

mod common;

use common::{audit_nearest_run, dist, oracle_projection, random_cloud, random_query, TestRng};
use polyproj::nearest::{
    meta_project_ideal, meta_project_robust, steepest_descent_exchange, MetaFlags, SubpolytopeState,
};
use polyproj::report::Termination;
use polyproj::solvers::{
    nearest_solver_by_name, InnerConfig, NearestPointSolver, OracleSolver, QpSolver,
};
use polyproj::{check_optimality, PointCloud, Tolerances};

fn flags() -> MetaFlags {
    MetaFlags {
        trace: true,
        ..MetaFlags::default()
    }
}

#[test]
fn both_meta_variants_match_oracle_for_every_solver() {
    let mut rng = TestRng::new(0x5EED);
    let names = ["wolfe", "mdm", "qp", "oracle"];
    for trial in 0..100 {
        let d = 2 + rng.below(2);
        let len = (d + 2) + rng.below(11 - d - 1); // d+2 ..= 12
        let cloud = random_cloud(&mut rng, d, len);
        let z = random_query(&mut rng, d);
        let reference = oracle_projection(&z, &cloud);

        for name in names {
            // Exact-grade configuration for the ideal variant.
            let ideal_cfg = InnerConfig {
                epsilon: (name == "mdm").then_some(1e-12),
                ..InnerConfig::default()
            };
            let solver = nearest_solver_by_name::<f64>(name, &ideal_cfg).unwrap();
            let report =
                meta_project_ideal(&z, &cloud, solver.as_ref(), None, None, 1000, &flags())
                    .unwrap();
            assert!(
                dist(&report.projection, &reference) <= 1e-6,
                "trial {trial} ideal/{name}: off by {}",
                dist(&report.projection, &reference)
            );
            audit_nearest_run(&report, &format!("trial {trial} ideal/{name}"));

            let solver = nearest_solver_by_name::<f64>(name, &InnerConfig::default()).unwrap();
            let tol = Tolerances::default_for_dim(d);
            let report =
                meta_project_robust(&z, &cloud, solver.as_ref(), &tol, None, &flags()).unwrap();
            assert_eq!(report.termination, Termination::OptimalEta);
            // eta = 1e-4 guarantees sqrt(eta)-closeness; the solvers land
            // far tighter in practice but only the bound is contractual.
            assert!(
                dist(&report.projection, &reference) <= 1e-2,
                "trial {trial} robust/{name}: off by {}",
                dist(&report.projection, &reference)
            );
            audit_nearest_run(&report, &format!("trial {trial} robust/{name}"));
        }
    }
}

#[test]
fn robust_meta_with_oracle_inner_at_tight_eta_matches_oracle() {
    let mut rng = TestRng::new(0xFACE);
    for trial in 0..100 {
        let d = 2 + rng.below(2);
        let len = (d + 2) + rng.below(9);
        let cloud = random_cloud(&mut rng, d, len.min(12));
        let z = random_query(&mut rng, d);
        let reference = oracle_projection(&z, &cloud);
        let tol = Tolerances::default_for_dim(d).with_eta(1e-8);
        let report = meta_project_robust(&z, &cloud, &OracleSolver, &tol, None, &flags()).unwrap();
        assert!(
            dist(&report.projection, &reference) <= 1e-6,
            "trial {trial}: off by {}",
            dist(&report.projection, &reference)
        );
        audit_nearest_run(&report, &format!("trial {trial}"));
    }
}

#[test]
fn approximate_optimality_bounds_both_directions() {
    // Forward: a point passing the eta test is within sqrt(eta) of the true
    // projection. Converse: a point within eps of it passes the test with
    // eta = (diam + dist) * eps.
    let mut rng = TestRng::new(0xB0B);
    for _ in 0..50 {
        let d = 2 + rng.below(2);
        let len = (d + 2) + rng.below(6);
        let cloud = random_cloud(&mut rng, d, len);
        let z = random_query(&mut rng, d);
        let reference = oracle_projection(&z, &cloud);
        let tol = Tolerances::default_for_dim(d);
        let report = meta_project_robust(
            &z,
            &cloud,
            &QpSolver::default(),
            &tol,
            None,
            &MetaFlags::default(),
        )
        .unwrap();
        if report.termination == Termination::OptimalEta {
            assert!(dist(&report.projection, &reference) <= tol.eta.sqrt() + 1e-9);
        }

        // Converse on a deliberately perturbed feasible point: blend the
        // projection toward a vertex by eps / diam.
        let diam = cloud.diameter();
        let eps = 1e-3;
        let t = eps / diam;
        let vertex = cloud.point(0);
        let y: Vec<f64> = reference
            .iter()
            .zip(vertex.iter())
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        let moved = dist(&y, &reference);
        assert!(moved <= eps * 1.0001);
        let zp_dist = dist(&reference, &z);
        let eta = (diam + zp_dist) * moved + 1e-12;
        let check = check_optimality(&y, &z, &cloud, eta).unwrap();
        assert!(
            check.satisfied,
            "converse bound violated: worst {} vs eta {eta}",
            check.worst_value
        );
    }
}

#[test]
fn exact_criterion_accepts_only_the_oracle_projection() {
    let mut rng = TestRng::new(0xE7A);
    for _ in 0..50 {
        let d = 2 + rng.below(2);
        let len = (d + 2) + rng.below(6);
        let cloud = random_cloud(&mut rng, d, len);
        let z = random_query(&mut rng, d);
        let reference = oracle_projection(&z, &cloud);
        let scale = cloud
            .iter_points()
            .map(|p| dist(p, &z).powi(2))
            .fold(1.0f64, f64::max);
        let at_opt = check_optimality(&reference, &z, &cloud, 1e-9 * scale).unwrap();
        assert!(at_opt.satisfied);

        // A feasible point measurably away from the projection must fail
        // the exact test.
        if dist(&reference, &z) > 1e-3 {
            let vertex = cloud.point(0).to_vec();
            let y: Vec<f64> = reference
                .iter()
                .zip(vertex.iter())
                .map(|(a, b)| 0.9 * a + 0.1 * b)
                .collect();
            if dist(&y, &reference) > 1e-3 {
                let off = check_optimality(&y, &z, &cloud, 0.0).unwrap();
                assert!(!off.satisfied);
            }
        }
    }
}

#[test]
fn exchange_rule_strictly_decreases_subpolytope_distance() {
    // After one ideal exchange, the oracle distance to the new subpolytope
    // drops strictly below the distance to the old one.
    let mut rng = TestRng::new(0xDECA);
    let oracle = OracleSolver;
    let mut exchanges = 0;
    for _ in 0..120 {
        let d = 2 + rng.below(2);
        let len = (d + 3) + rng.below(6);
        let cloud = random_cloud(&mut rng, d, len);
        let z = random_query(&mut rng, d);
        let indices: Vec<usize> = (0..d + 1).collect();
        let out = oracle.solve(&z, &indices, &cloud).unwrap();
        let dense = out.coeffs.dense_over(&indices).unwrap();
        let state = SubpolytopeState::new(indices.clone(), dense, &z, &cloud).unwrap();
        let check = check_optimality(&state.trial_point, &z, &cloud, 1e-10).unwrap();
        if check.satisfied {
            continue;
        }
        let decision = match steepest_descent_exchange(&state, &z, &cloud) {
            Ok(dec) => dec,
            Err(_) => continue, // inconsistent-slack guard; not under test
        };
        let next: Vec<usize> = indices
            .iter()
            .map(|&i| {
                if i == decision.remove_index {
                    decision.insert_index
                } else {
                    i
                }
            })
            .collect();
        let before = dist(
            &oracle
                .solve(&z, &indices, &cloud)
                .unwrap()
                .coeffs
                .evaluate(&cloud)
                .unwrap(),
            &z,
        );
        let after = dist(
            &oracle
                .solve(&z, &next, &cloud)
                .unwrap()
                .coeffs
                .evaluate(&cloud)
                .unwrap(),
            &z,
        );
        assert!(
            after < before,
            "exchange failed to decay: {before} -> {after}"
        );
        exchanges += 1;
    }
    assert!(exchanges > 40, "too few exchanges exercised: {exchanges}");
}

#[test]
fn wolfe_robust_runs_never_correct() {
    let mut rng = TestRng::new(0x11AB);
    let wolfe = nearest_solver_by_name::<f64>("wolfe", &InnerConfig::default()).unwrap();
    for _ in 0..80 {
        let d = 2 + rng.below(2);
        let len = (d + 2) + rng.below(8);
        let cloud = random_cloud(&mut rng, d, len);
        let z = random_query(&mut rng, d);
        let tol = Tolerances::default_for_dim(d);
        let report = meta_project_robust(
            &z,
            &cloud,
            wolfe.as_ref(),
            &tol,
            None,
            &MetaFlags::default(),
        )
        .unwrap();
        assert_eq!(report.corrections_step3, 0);
        assert_eq!(report.corrections_step4, 0);
    }
}

#[test]
fn subpolytope_state_invariants_hold() {
    let cloud: PointCloud<f64> =
        PointCloud::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let state =
        SubpolytopeState::new(vec![0, 1, 2], vec![0.25, 0.25, 0.5], &[0.0, 0.0], &cloud).unwrap();
    // trial_point = evaluate(weights), theta = ||trial - z|| within 1e-12.
    assert!(dist(&state.trial_point, &[0.75, 0.75]) < 1e-15);
    assert!((state.theta - dist(&state.trial_point, &[0.0, 0.0])).abs() < 1e-12);
}
