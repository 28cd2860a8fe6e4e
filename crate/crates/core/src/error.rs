use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("value {value} outside the feasible box [-{bound}, {bound}] at index {index}")]
    Domain { index: usize, value: f64, bound: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("refused: {what} requires {required} candidates, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: f64,
        budget: f64,
    },

    #[error("numerical failure at iteration {iteration}: {reason}")]
    Numerical {
        iteration: usize,
        reason: String,
        /// Last iterate that was entirely finite.
        last_finite: Vec<f64>,
    },

    #[error("parse error in {path} line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
