//! Iteratively regularized incremental gradient method for simple bilevel
//! problems: minimize a strongly convex `h` over the minimizers of a finite
//! sum `f = f_1 + ... + f_m` on a simple convex set.

// `!(a <= b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod harness;
pub mod numerics;
pub mod oracles;
pub mod schedules;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::FeasibleSet;
pub use numerics::{DenseVector, SparseVector};
pub use oracles::{ComponentOracle, ProblemInstance, UpperOracle};
pub use schedules::{validate, PowerSchedule};
pub use solver::{run_irig, RunOptions, RunOutput, Trace};
