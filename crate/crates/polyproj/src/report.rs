//! Solve reports, iteration traces and termination bookkeeping shared by
//! the projection and distance meta-algorithms.

use crate::geometry::ConvexCoefficients;
use crate::scalar::Scalar;

/// Why a meta-algorithm run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The stopping criterion held with the configured slack.
    OptimalEta,
    /// The outer-iteration cap (or a wall-clock deadline) was reached; the
    /// best iterate so far is reported.
    IterationCap,
    /// Coefficient correction failed or was attempted twice within one
    /// iteration; the best iterate so far is reported.
    CorrectionFailure,
}

impl Termination {
    /// Conventional process exit code for this outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Termination::OptimalEta => 0,
            Termination::CorrectionFailure => 2,
            Termination::IterationCap => 3,
        }
    }
}

/// One outer-iteration record of the projection meta-algorithm.
#[derive(Clone, Debug)]
pub struct NearestTraceRecord<T> {
    /// Outer iteration counter.
    pub n: usize,
    /// Active index set at this point of the run.
    pub index_set: Vec<usize>,
    /// `‖y_n - z‖` for the current trial point.
    pub theta: T,
    /// `min_i ⟨y_n - z, x_i - y_n⟩` over the full cloud.
    pub worst_value: T,
    /// Whether an affine-hull correction was applied at this record.
    pub correction_step3: bool,
    /// Whether a dependence-based correction was applied at this record.
    pub correction_step4: bool,
}

/// One outer-iteration record of the distance meta-algorithm.
#[derive(Clone, Debug)]
pub struct PairTraceRecord<T> {
    pub n: usize,
    pub index_set_p: Vec<usize>,
    pub index_set_q: Vec<usize>,
    /// `‖v_n - w_n‖`.
    pub theta: T,
    pub rho_x: T,
    pub rho_y: T,
    /// Whether the coefficients correction method ran at this record.
    pub correction: bool,
}

/// Result of a projection solve.
#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    /// The computed projection.
    pub projection: Vec<T>,
    /// Convex coefficients over the full cloud; the support is the final
    /// active index set (zero weights included).
    pub coeffs_global: ConvexCoefficients<T>,
    /// Accepted outer iterations (subpolytope shifts). Zero when the first
    /// subproblem already passed the stopping test or the solver ran
    /// directly on the whole cloud.
    pub outer_iterations: usize,
    /// Inner-solver invocations.
    pub solver_calls: usize,
    /// Total inner-solver iterations across all calls.
    pub inner_iterations: usize,
    /// Number of affine-hull corrections taken.
    pub corrections_step3: usize,
    /// Number of dependence-based corrections taken.
    pub corrections_step4: usize,
    pub termination: Termination,
    /// `min_i ⟨y - z, x_i - y⟩` at the returned point.
    pub final_worst_value: T,
    /// Final `‖y - z‖`.
    pub theta: T,
    /// Final `theta` per accepted outer iteration, for decay audits.
    pub thetas: Vec<T>,
    /// Full per-iteration trace, present when tracing was requested.
    pub trace: Option<Vec<NearestTraceRecord<T>>>,
    /// Optional diagnostic attached to abnormal terminations.
    pub diagnostic: Option<String>,
}

impl<T: Scalar> SolveReport<T> {
    /// True when the recorded per-iteration distances strictly decrease.
    pub fn decay_audit(&self) -> bool {
        decay_audit(&self.thetas)
    }
}

/// Result of a distance solve.
#[derive(Clone, Debug)]
pub struct PairReport<T> {
    /// The closest pair `(v, w)` found, `v` in the first hull.
    pub pair: (Vec<T>, Vec<T>),
    /// `‖v - w‖`.
    pub distance: T,
    pub coeffs_p: ConvexCoefficients<T>,
    pub coeffs_q: ConvexCoefficients<T>,
    pub outer_iterations: usize,
    pub solver_calls: usize,
    pub inner_iterations: usize,
    /// Number of coefficients-correction passes taken.
    pub corrections: usize,
    pub termination: Termination,
    pub rho_x: T,
    pub rho_y: T,
    pub thetas: Vec<T>,
    pub trace: Option<Vec<PairTraceRecord<T>>>,
    pub diagnostic: Option<String>,
}

impl<T: Scalar> PairReport<T> {
    pub fn decay_audit(&self) -> bool {
        decay_audit(&self.thetas)
    }
}

/// True iff the sequence strictly decreases. Each entry is the settled
/// objective value of one accepted outer iteration; corrections within an
/// iteration must already be folded into its final value.
pub fn decay_audit<T: Scalar>(thetas: &[T]) -> bool {
    thetas.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_audit_accepts_strict_decrease() {
        // theta_0 = 2 (distance of the origin to (0,2)), then 6/sqrt(17).
        let thetas = [2.0, 6.0 / 17.0f64.sqrt()];
        assert!(decay_audit(&thetas));
    }

    #[test]
    fn decay_audit_rejects_shuffled_trace() {
        assert!(!decay_audit(&[1.0, 2.0]));
        assert!(!decay_audit(&[2.0, 1.0, 1.0]));
    }

    #[test]
    fn empty_and_singleton_traces_pass() {
        assert!(decay_audit::<f64>(&[]));
        assert!(decay_audit(&[0.5]));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Termination::OptimalEta.exit_code(), 0);
        assert_eq!(Termination::CorrectionFailure.exit_code(), 2);
        assert_eq!(Termination::IterationCap.exit_code(), 3);
    }
}
