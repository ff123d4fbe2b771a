//! The Fourier-matrix degeneracy criterion.
//!
//! For a kernel `phi: R -> R^d` and parameters `(b, lambda)`, the lacunary
//! series `S_t(lambda) = sum_n a_{t b^n}(phi) lambda^-n` (over `t` not
//! divisible by `b`) assemble into real matrices `A_{lambda,m}` whose left
//! null space, intersected over `m`, has dimension `q = q(phi, lambda, b)`:
//! the number of independent directions in which the graph function is
//! smooth. This crate computes `q`, scans `(1/b, 1)` for the finitely many
//! degenerate `lambda`, reconstructs the conjugating function `psi` where one
//! exists, applies the genericity perturbation, and evaluates the closed-form
//! graph dimension `min(log_{1/lambda} b, 1 + (d - q)(1 + log_b lambda))`.

pub mod criterion;
pub mod dimension;
pub mod ingest;
pub mod lacunary;
pub mod psi;
pub mod rank;
pub mod scan;
pub mod series;

pub use criterion::{compute_d, compute_q, compute_q_with_floor, CriterionReport, M_CAP};
pub use dimension::{predicted_dimension, DimensionBranch};
pub use ingest::ingest_sampled;
pub use lacunary::{lacunary_index, perturb_to_generic, LacunaryIndex};
pub use psi::{reconstruct_psi, ReconstructOutcome};
pub use rank::{kernel_space, kernel_space_with_floor, minor_sum_l, KernelSpace};
pub use scan::{scan_degenerate, scan_degenerate_range, DegenerateLambda, GridPoint, ScanResult};
pub use series::{build_matrix, fourier_coeff, series_s, CriterionMatrix, SeriesValue};

use std::fmt;
use weier_core::CoreError;

#[derive(Debug, Clone, PartialEq)]
pub enum CriterionError {
    Core(CoreError),
    /// `t` is divisible by `b` and cannot index a lacunary chain.
    NotLacunary { t: u64, b: u32 },
    CoordOutOfRange { coord: usize, d: usize },
    /// Sample ingestion rejected the input (count, shape or bounds).
    BadSamples(String),
    /// Theorem-B style scans require a non-constant kernel.
    ConstantKernel,
    /// Minor order outside `1..=min(rows, cols)`.
    MinorOrder { k: usize, rows: usize, cols: usize },
    /// Invalid scan or stabilization argument.
    BadArg(String),
}

impl fmt::Display for CriterionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionError::Core(e) => write!(f, "{e}"),
            CriterionError::NotLacunary { t, b } => {
                write!(f, "t = {t} is divisible by b = {b}")
            }
            CriterionError::CoordOutOfRange { coord, d } => {
                write!(f, "coordinate {coord} out of range 1..={d}")
            }
            CriterionError::BadSamples(msg) => write!(f, "bad samples: {msg}"),
            CriterionError::ConstantKernel => {
                write!(f, "kernel is constant; the degeneracy scan requires a non-constant kernel")
            }
            CriterionError::MinorOrder { k, rows, cols } => {
                write!(f, "minor order {k} out of range for a {rows}x{cols} matrix")
            }
            CriterionError::BadArg(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CriterionError {}

impl From<CoreError> for CriterionError {
    fn from(e: CoreError) -> Self {
        CriterionError::Core(e)
    }
}
