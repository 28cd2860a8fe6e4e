//! Recovery of sparse signals over a finite symmetric alphabet from few
//! linear measurements, using the minimax-concave-penalized Lasso and an
//! ADMM solver, with certificates, convex baselines, a benchmark harness
//! and an RSS localization experiment.

pub mod baselines;
pub mod bench;
pub mod certify;
pub mod cli;
pub mod error;
pub mod io;
pub mod localize;
pub mod model;
pub mod penalty;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use model::{Alphabet, Problem, SparseSignal};
pub use solver::{RecoveryResult, SolverConfig};
