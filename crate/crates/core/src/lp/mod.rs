//! Exact linear programming over the rule variables.

pub mod model;
pub mod simplex;
pub mod solve;

use crate::rules::RuleKey;

pub use model::{
    build_model, perturbation_survivors, tight_rows, verify, Certificate, LinearConstraint,
    LpModel, ModelOptions, Provenance,
};
pub use solve::{solve, solve_exact, solve_fast, Solution, SolveControl, SolveOptions};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("certificate has no value for {0}")]
    MissingVariable(RuleKey),
    #[error("objective is unbounded")]
    Unbounded,
    #[error("solve cancelled")]
    Cancelled,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal solver error: {0}")]
    Internal(String),
}
