//! Distance meta-algorithm properties: oracle agreement, symmetry,
//! translation equivariance, and one-sided exchange behavior.

mod common;

use common::{audit_pair_run, dist, random_cloud, TestRng};
use polyproj::distance::{meta_distance_ideal, meta_distance_robust, PairMetaFlags};
use polyproj::report::Termination;
use polyproj::solvers::{
    distance_solver_by_name, DistanceSolver, InnerConfig, PairOracleSolver, PairQpSolver,
};
use polyproj::{PointCloud, Tolerances};

fn flags() -> PairMetaFlags {
    PairMetaFlags {
        trace: true,
        ..PairMetaFlags::default()
    }
}

fn oracle_pair_distance(cloud_p: &PointCloud<f64>, cloud_q: &PointCloud<f64>) -> (f64, Vec<f64>) {
    let all_p: Vec<usize> = (0..cloud_p.len()).collect();
    let all_q: Vec<usize> = (0..cloud_q.len()).collect();
    let out = PairOracleSolver
        .solve_pair(&all_p, cloud_p, &all_q, cloud_q)
        .unwrap();
    let v = out.coeffs_p.evaluate(cloud_p).unwrap();
    let w = out.coeffs_q.evaluate(cloud_q).unwrap();
    let diff: Vec<f64> = v.iter().zip(w.iter()).map(|(a, b)| a - b).collect();
    (dist(&v, &w), diff)
}

#[test]
fn robust_distance_matches_pair_oracle_for_each_solver() {
    let mut rng = TestRng::new(0xD15C0);
    let names = ["wolfe", "mdm", "qp", "pair-qp"];
    for trial in 0..60 {
        let d = 2 + rng.below(2);
        let lp = (d + 2) + rng.below(3);
        let lq = (d + 2) + rng.below(3);
        let cloud_p = random_cloud(&mut rng, d, lp);
        let cloud_q = random_cloud(&mut rng, d, lq);
        let (ref_dist, ref_diff) = oracle_pair_distance(&cloud_p, &cloud_q);
        let tol: Tolerances<f64> = Tolerances::default_for_dim(d);
        let bound = (2.0 * tol.eta).sqrt();

        for name in names {
            let solver = distance_solver_by_name::<f64>(name, &InnerConfig::default()).unwrap();
            let report = meta_distance_robust(
                &cloud_p,
                &cloud_q,
                solver.as_ref(),
                &tol,
                None,
                None,
                &flags(),
            )
            .unwrap();
            assert_eq!(
                report.termination,
                Termination::OptimalEta,
                "trial {trial} {name}: {:?}",
                report.diagnostic
            );
            let diff: Vec<f64> = report
                .pair
                .0
                .iter()
                .zip(report.pair.1.iter())
                .map(|(a, b)| a - b)
                .collect();
            assert!(
                dist(&diff, &ref_diff) <= bound,
                "trial {trial} {name}: pair difference off by {}",
                dist(&diff, &ref_diff)
            );
            assert!(report.distance <= ref_dist + bound);
            audit_pair_run(&report, &format!("trial {trial} {name}"));
        }
    }
}

#[test]
fn ideal_distance_matches_pair_oracle() {
    let mut rng = TestRng::new(0x1DEA);
    for trial in 0..40 {
        let d = 2;
        let lp = 4 + rng.below(5);
        let lq = 4 + rng.below(5);
        let cloud_p = random_cloud(&mut rng, d, lp);
        let cloud_q = random_cloud(&mut rng, d, lq);
        let (ref_dist, _) = oracle_pair_distance(&cloud_p, &cloud_q);
        let solver = distance_solver_by_name::<f64>("qp", &InnerConfig::default()).unwrap();
        let report = meta_distance_ideal(
            &cloud_p,
            &cloud_q,
            solver.as_ref(),
            None,
            None,
            None,
            1000,
            &flags(),
        )
        .unwrap();
        assert!(
            (report.distance - ref_dist).abs() <= 1e-7,
            "trial {trial}: {} vs oracle {ref_dist} ({:?})",
            report.distance,
            report.diagnostic
        );
        audit_pair_run(&report, &format!("trial {trial}"));
    }
}

#[test]
fn distance_is_symmetric() {
    let mut rng = TestRng::new(0x5CA1E5);
    for _ in 0..30 {
        let d = 2 + rng.below(2);
        let cloud_p = random_cloud(&mut rng, d, d + 3);
        let cloud_q = random_cloud(&mut rng, d, d + 4);
        let tol = Tolerances::default_for_dim(d);
        let fwd = meta_distance_robust(
            &cloud_p,
            &cloud_q,
            &PairQpSolver::default(),
            &tol,
            None,
            None,
            &PairMetaFlags::default(),
        )
        .unwrap();
        let bwd = meta_distance_robust(
            &cloud_q,
            &cloud_p,
            &PairQpSolver::default(),
            &tol,
            None,
            None,
            &PairMetaFlags::default(),
        )
        .unwrap();
        assert!(
            (fwd.distance - bwd.distance).abs() <= 1e-9,
            "asymmetric: {} vs {}",
            fwd.distance,
            bwd.distance
        );
    }
}

#[test]
fn translation_leaves_distance_invariant_and_shifts_the_pair() {
    let mut rng = TestRng::new(0x7A15);
    let shift = [10.0, -3.0, 5.0];
    for _ in 0..20 {
        let d = 3;
        let cloud_p = random_cloud(&mut rng, d, d + 4);
        let cloud_q = random_cloud(&mut rng, d, d + 4);
        let translate = |c: &PointCloud<f64>| {
            let rows: Vec<Vec<f64>> = c
                .iter_points()
                .map(|p| p.iter().zip(shift.iter()).map(|(a, t)| a + t).collect())
                .collect();
            PointCloud::from_rows(&rows).unwrap()
        };
        let tp = translate(&cloud_p);
        let tq = translate(&cloud_q);
        let tol = Tolerances::default_for_dim(d);
        let base = meta_distance_robust(
            &cloud_p,
            &cloud_q,
            &PairQpSolver::default(),
            &tol,
            None,
            None,
            &PairMetaFlags::default(),
        )
        .unwrap();
        let moved = meta_distance_robust(
            &tp,
            &tq,
            &PairQpSolver::default(),
            &tol,
            None,
            None,
            &PairMetaFlags::default(),
        )
        .unwrap();
        assert!(
            (base.distance - moved.distance).abs() <= 1e-9,
            "distance changed under translation: {} vs {}",
            base.distance,
            moved.distance
        );
        let shifted_v: Vec<f64> = base
            .pair
            .0
            .iter()
            .zip(shift.iter())
            .map(|(a, t)| a + t)
            .collect();
        assert!(dist(&shifted_v, &moved.pair.0) <= 1e-9);
    }
}

#[test]
fn only_violating_side_is_exchanged() {
    // Trace invariant: per outer transition, a side's index set changes only
    // if that side's residual violated -eta at the preceding test.
    let mut rng = TestRng::new(0xCA5E);
    let tol = Tolerances::<f64>::default_for_dim(2);
    for _ in 0..40 {
        let cloud_p = random_cloud(&mut rng, 2, 7);
        // Shift Q well away so the runs take several exchanges.
        let rows: Vec<Vec<f64>> = random_cloud(&mut rng, 2, 7)
            .iter_points()
            .map(|p| vec![p[0] + 4.0, p[1]])
            .collect();
        let cloud_q = PointCloud::from_rows(&rows).unwrap();
        let report = meta_distance_robust(
            &cloud_p,
            &cloud_q,
            &PairQpSolver::default(),
            &tol,
            None,
            None,
            &flags(),
        )
        .unwrap();
        let trace = report.trace.as_ref().unwrap();
        for pair in trace.windows(2) {
            let (before, after) = (&pair[0], &pair[1]);
            if after.n == before.n {
                continue; // correction record, index sets unchanged
            }
            if before.rho_x >= -tol.eta {
                assert_eq!(before.index_set_p, after.index_set_p);
            }
            if before.rho_y >= -tol.eta {
                assert_eq!(before.index_set_q, after.index_set_q);
            }
        }
    }
}

#[test]
fn intersecting_clouds_reach_near_zero_distance() {
    let mut rng = TestRng::new(0x0);
    let tol = Tolerances::<f64>::default_for_dim(2);
    for _ in 0..20 {
        // Same sampling box for both clouds: hulls almost surely intersect.
        let cloud_p = random_cloud(&mut rng, 2, 8);
        let cloud_q = random_cloud(&mut rng, 2, 8);
        let (ref_dist, _) = oracle_pair_distance(&cloud_p, &cloud_q);
        if ref_dist > 1e-9 {
            continue;
        }
        let report = meta_distance_robust(
            &cloud_p,
            &cloud_q,
            &PairQpSolver::default(),
            &tol,
            None,
            None,
            &PairMetaFlags::default(),
        )
        .unwrap();
        assert!(report.distance <= (2.0 * tol.eta).sqrt());
    }
}
