//! Accelerated nearest-point and polytope-distance computations.
//!
//! The crate solves two problems over polytopes given as convex hulls of
//! finitely many points (V-representation):
//!
//! * **projection**: the nearest point to a query `z` in
//!   `conv{x_1, ..., x_ℓ}`;
//! * **distance**: the closest pair between two such hulls.
//!
//! Any of the bundled inner solvers (Wolfe, MDM, active-set QP, or a
//! brute-force enumeration oracle) can solve these directly. When the number
//! of points is much larger than the dimension `d`, the meta-algorithms in
//! [`nearest`] and [`mod@distance`] accelerate an arbitrary inner solver by
//! applying it only to a moving `(d+1)`-point subpolytope, exchanging one
//! vertex per iteration until the subproblem solution is globally optimal.
//!
//! All numeric code is generic over a floating-point [`Scalar`]; `f64` is
//! the intended production type and the default tolerances assume it.

pub mod distance;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod nearest;
pub mod report;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{
    affine_dependence_vector, check_optimality, check_pair_optimality, evaluate_point,
    project_affine_hull, ConvexCoefficients, PointCloud, Tolerances,
};
pub use report::{PairReport, SolveReport, Termination};
pub use scalar::Scalar;

pub use distance::{distance, DistanceOptions};
pub use nearest::{project, ProjectOptions};

/// Concrete double-precision aliases for the main public types.
pub type PointCloudF64 = PointCloud<f64>;
pub type ConvexCoefficientsF64 = ConvexCoefficients<f64>;
pub type TolerancesF64 = Tolerances<f64>;
pub type SolveReportF64 = SolveReport<f64>;
pub type PairReportF64 = PairReport<f64>;

/// Single-precision aliases; loosen the default tolerances when using these.
pub type PointCloudF32 = PointCloud<f32>;
pub type ConvexCoefficientsF32 = ConvexCoefficients<f32>;
