//! Geometric primitives shared by all solvers: point clouds, convex
//! coefficient vectors, optimality certificates and affine-hull projections.

mod affine;
mod cloud;
mod coeffs;
mod optimality;

pub use affine::{
    affine_dependence_vector, best_affine_dependence, max_orthogonality_defect,
    project_affine_hull, AffineDependence, AffineProjection,
};
pub use cloud::PointCloud;
pub use coeffs::{evaluate_point, ConvexCoefficients};
pub use optimality::{
    check_optimality, check_optimality_scaled, check_pair_optimality,
    parameters_consistency_warning, OptimalityCheck, PairOptimalityCheck, Tolerances,
};

use crate::scalar::Scalar;

/// Dot product of two equal-length slices.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        s += *x * *y;
    }
    s
}

/// Euclidean norm.
#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Euclidean distance between two points.
#[inline]
pub fn distance_between<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        let d = *x - *y;
        s += d * d;
    }
    s.sqrt()
}

/// `a - b` as a new vector.
#[inline]
pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| *x - *y).collect()
}
