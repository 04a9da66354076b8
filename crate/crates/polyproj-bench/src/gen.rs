//! Random problem generators.
//!
//! Both generators draw from the compressed-cube family: points uniform on
//! `[-1, 1]^d`, then squeezed to 1% thickness along the first coordinate
//! and shifted to `±1` there. The query (or the opposing cloud) sits across
//! that thin slab, which makes the projection land on a facet-interior
//! point supported by many near-optimal vertices, a stress case for
//! nearest-point methods.

use polyproj::PointCloud;

use crate::rng::{SplitMix64, GENERATOR_VERSION};

/// Which problem family an instance belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Nearest,
    Distance,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Nearest => "nearest",
            ProblemKind::Distance => "distance",
        }
    }
}

/// A generated problem: one cloud plus query for projections, two clouds
/// for distances. Regenerating with the same seed reproduces the instance
/// byte for byte.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub cloud_p: PointCloud<f64>,
    pub cloud_q: Option<PointCloud<f64>>,
    /// Query point for nearest instances (the origin for this family).
    pub query: Option<Vec<f64>>,
    pub seed: u64,
    pub generator_name: String,
    pub d: usize,
    pub ell: usize,
    pub m: usize,
}

fn compressed_points(rng: &mut SplitMix64, d: usize, count: usize, center: f64) -> Vec<f64> {
    let mut data = Vec::with_capacity(d * count);
    for _ in 0..count {
        for k in 0..d {
            let raw = rng.next_symmetric();
            if k == 0 {
                data.push(center + 0.01 * raw);
            } else {
                data.push(raw);
            }
        }
    }
    data
}

/// Nearest-point instance: `ℓ` compressed-cube points with first coordinate
/// in `[0.99, 1.01]`, query at the origin (so `dist(z, P) >= 0.99`).
pub fn gen_compressed_cube(d: usize, ell: usize, seed: u64) -> ProblemInstance {
    assert!(d >= 1 && ell >= 1);
    let mut rng = SplitMix64::new(seed);
    let data = compressed_points(&mut rng, d, ell, 1.0);
    let cloud = PointCloud::new(d, data).expect("generated coordinates are finite");
    ProblemInstance {
        kind: ProblemKind::Nearest,
        cloud_p: cloud,
        cloud_q: None,
        query: Some(vec![0.0; d]),
        seed,
        generator_name: format!("compressed-cube/{GENERATOR_VERSION}"),
        d,
        ell,
        m: 0,
    }
}

/// Distance instance: two compressed clouds of `ℓ` points each, centered at
/// `+1` and `-1` along the first coordinate, hence separated by at least
/// `1.98`. The first cloud is drawn before the second from one stream.
pub fn gen_two_cubes(d: usize, ell: usize, seed: u64) -> ProblemInstance {
    assert!(d >= 1 && ell >= 1);
    let mut rng = SplitMix64::new(seed);
    let data_p = compressed_points(&mut rng, d, ell, 1.0);
    let data_q = compressed_points(&mut rng, d, ell, -1.0);
    let cloud_p = PointCloud::new(d, data_p).expect("generated coordinates are finite");
    let cloud_q = PointCloud::new(d, data_q).expect("generated coordinates are finite");
    ProblemInstance {
        kind: ProblemKind::Distance,
        cloud_p,
        cloud_q: Some(cloud_q),
        query: None,
        seed,
        generator_name: format!("two-cubes/{GENERATOR_VERSION}"),
        d,
        ell,
        m: ell,
    }
}
