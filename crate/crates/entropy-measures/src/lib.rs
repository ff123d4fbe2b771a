//! Empirical and product measures with b-adic partition entropy.
//!
//! The partition `L_n` cuts `R^k` into half-open cells of side `b^-n`;
//! entropies are reported in base-b units so one level of refinement adds at
//! most the ambient dimension. Point-cloud measures ([`EmpiricalMeasure`])
//! carry the graph and flow-projection samples; digit-product measures
//! ([`ProductMeasure`]) supply analytically exact cell weights so entropy
//! identities can be tested without Monte-Carlo noise.

pub mod diagnostics;
pub mod entropy;
pub mod measure;
pub mod product;
pub mod sample;

pub use diagnostics::complement_basis;
pub use entropy::{EntropySlope, LevelEntropy};
pub use measure::{CellIndex, EmpiricalMeasure};
pub use product::ProductMeasure;
pub use sample::{random_stream, sample_flow_projection, sample_mu};

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureError {
    /// A measure needs at least one point of positive mass.
    EmptyMeasure,
    /// Conditioning on a cell of zero mass.
    EmptyCell,
    /// Projection or diagnostic basis is not orthonormal.
    BadBasis,
    /// Weight vector invalid (negative, non-finite, or zero total).
    BadWeights(String),
    BadArg(String),
    /// Measure dump could not be parsed; 1-based line number.
    Parse { line: usize, msg: String },
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::EmptyMeasure => write!(f, "measure has no points"),
            MeasureError::EmptyCell => write!(f, "cell carries zero mass"),
            MeasureError::BadBasis => write!(f, "basis is not orthonormal"),
            MeasureError::BadWeights(msg) => write!(f, "bad weights: {msg}"),
            MeasureError::BadArg(msg) => write!(f, "{msg}"),
            MeasureError::Parse { line, msg } => {
                write!(f, "measure parse error at line {line}: {msg}")
            }
        }
    }
}

impl std::error::Error for MeasureError {}
