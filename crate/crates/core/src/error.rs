use std::fmt;

use thiserror::Error;

/// One reason a system description was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonContraction { edge: String, a: f64, b: f64 },
    ProbabilityRange { edge: String, p: f64 },
    ProbabilityRowSum { vertex: String, sum: f64 },
    DanglingVertex { vertex: String },
    NotStronglyConnected { unreachable: Vec<String> },
    UnknownVertex { edge: String, vertex: String },
    DuplicateId { id: String },
    BadSign { edge: String },
    Empty,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonContraction { edge, a, b } => {
                write!(f, "NonContraction: edge {edge} has a={a}, b={b}; both must lie in (0,1)")
            }
            Violation::ProbabilityRange { edge, p } => {
                write!(f, "ProbabilityRange: edge {edge} has p={p}, outside (0,1]")
            }
            Violation::ProbabilityRowSum { vertex, sum } => {
                write!(f, "ProbabilityRowSum: vertex {vertex} has outgoing probabilities summing to {sum}")
            }
            Violation::DanglingVertex { vertex } => {
                write!(f, "DanglingVertex: vertex {vertex} has no outgoing edge")
            }
            Violation::NotStronglyConnected { unreachable } => {
                write!(f, "NotStronglyConnected: vertices {} are not mutually reachable", unreachable.join(", "))
            }
            Violation::UnknownVertex { edge, vertex } => {
                write!(f, "UnknownVertex: edge {edge} refers to undeclared vertex {vertex}")
            }
            Violation::DuplicateId { id } => write!(f, "DuplicateId: {id} declared twice"),
            Violation::BadSign { edge } => write!(f, "BadSign: edge {edge} has a sign other than +1/-1"),
            Violation::Empty => write!(f, "Empty: system has no vertices or no edges"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid system: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),
    #[error("word is not admissible: {0}")]
    NotAdmissible(String),
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("could not bracket a root of rho = 1 in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("positive pattern does not split into two conjugate irreducible blocks")]
    MalformedPattern,
    #[error("spectral radius {rho} is not 1 at the evaluation point")]
    NotAtRhoOne { rho: f64 },
    #[error("system has anti-diagonal edges; the diagonal engine does not apply")]
    NotDiagonalSystem,
    #[error("system has more than one vertex")]
    NotSingleVertex,
    #[error("regime ambiguous: gamma_A - t = {da}, gamma_B - t = {db}")]
    RegimeAmbiguous { da: f64, db: f64 },
    #[error("minimizer cross-check failed: root value {root}, grid value {grid}")]
    CrossCheck { root: f64, grid: f64 },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
