//! Shared helpers for the integration tests: a deterministic RNG, random
//! instance builders, full-cloud oracle references and run audits.

#![allow(dead_code)]

use std::collections::HashSet;

use polyproj::report::{PairReport, SolveReport};
use polyproj::solvers::{NearestPointSolver, OracleSolver};
use polyproj::PointCloud;

/// SplitMix64; fixed here so test instances never depend on external RNG
/// stream changes.
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, bound: usize) -> usize {
        ((self.unit() * bound as f64) as usize).min(bound - 1)
    }
}

/// Random cloud with coordinates in [-1, 1].
pub fn random_cloud(rng: &mut TestRng, d: usize, len: usize) -> PointCloud<f64> {
    let mut data = Vec::with_capacity(d * len);
    for _ in 0..d * len {
        data.push(rng.range(-1.0, 1.0));
    }
    PointCloud::new(d, data).unwrap()
}

/// Random query point in [-2, 2]^d (outside the hull more often than not).
pub fn random_query(rng: &mut TestRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.range(-2.0, 2.0)).collect()
}

/// Ground-truth projection of `z` onto the full cloud via subset
/// enumeration.
pub fn oracle_projection(z: &[f64], cloud: &PointCloud<f64>) -> Vec<f64> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    let out = OracleSolver
        .solve(z, &all, cloud)
        .expect("oracle within guards");
    out.coeffs.evaluate(cloud).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Asserts strict decay and the no-repeat property of a projection run.
pub fn audit_nearest_run(report: &SolveReport<f64>, context: &str) {
    assert!(
        report.decay_audit(),
        "{context}: theta trace not strictly decreasing: {:?}",
        report.thetas
    );
    if let Some(trace) = &report.trace {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut last_n = usize::MAX;
        for rec in trace {
            if rec.n != last_n {
                let mut key = rec.index_set.clone();
                key.sort_unstable();
                assert!(
                    seen.insert(key),
                    "{context}: index set repeated at n = {}",
                    rec.n
                );
                last_n = rec.n;
            }
        }
    }
}

/// Asserts strict decay and the no-repeat property of a distance run.
pub fn audit_pair_run(report: &PairReport<f64>, context: &str) {
    assert!(
        report.decay_audit(),
        "{context}: theta trace not strictly decreasing: {:?}",
        report.thetas
    );
    if let Some(trace) = &report.trace {
        let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
        let mut last_n = usize::MAX;
        for rec in trace {
            if rec.n != last_n {
                let mut p = rec.index_set_p.clone();
                let mut q = rec.index_set_q.clone();
                p.sort_unstable();
                q.sort_unstable();
                assert!(
                    seen.insert((p, q)),
                    "{context}: index-set pair repeated at n = {}",
                    rec.n
                );
                last_n = rec.n;
            }
        }
    }
}
