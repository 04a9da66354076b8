//! Benchmark harness for the accelerated polytope projection and distance
//! solvers: deterministic instance generation, suite orchestration and CSV
//! emission. The `polyproj` binary in this crate exposes the solvers and
//! the harness on the command line.

pub mod csvio;
pub mod gen;
pub mod rng;
pub mod suite;

pub use csvio::{emit_csv, emit_plotdata, parse_csv, render_csv, render_plotdata};
pub use gen::{gen_compressed_cube, gen_two_cubes, ProblemInstance, ProblemKind};
pub use rng::{derive_seed, SplitMix64};
pub use suite::{instance_for, run_suite, summarize, BenchRecord, CellSummary, SuiteConfig};
