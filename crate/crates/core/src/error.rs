use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Family, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{family}: x = {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { family: Family, x: f64, lo: f64, hi: f64 },
    #[error("invalid domain [{lo}, {hi}]")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("{family}: {reason}")]
    BadParams { family: Family, reason: String },
    #[error("integration bounds reversed: a = {a} > b = {b}")]
    ReversedInterval { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("AI strength {strength} ties with a human agent; strengths must be strictly ordered")]
    StrengthTie { strength: f64 },
    #[error("scenario is missing `{0}`")]
    MissingField(&'static str),
    #[error("activation game depth must be at least 1")]
    ZeroDepth,
    #[error("activation game with depth {depth} has {nodes} nodes, over the budget of {budget}")]
    NodeBudget { depth: usize, nodes: usize, budget: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{origin}: parse error at line {line}, column {column}: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("{origin}: at `{field}`: {message}")]
    Schema { origin: String, field: String, message: String },
    #[error("{origin}: scenario failed validation:\n{}", render(.violations))]
    Invalid { origin: String, violations: Vec<Violation> },
    #[error("override `{0}`: expected <path>=<value>")]
    BadOverride(String),
    #[error("parameter path `{0}` does not resolve in the base scenario")]
    UnknownPath(String),
    #[error("sweep expands to {size} scenarios, over the budget of {budget}")]
    Budget { size: usize, budget: usize },
    #[error("invalid sweep axis `{path}`: {reason}")]
    BadAxis { path: String, reason: String },
}

fn render(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n")
}
