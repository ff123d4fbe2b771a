//! Core types and series evaluation for vector-valued Weierstrass-type
//! functions.
//!
//! The central objects are a base `b >= 2`, a contraction `lambda` in
//! `(1/b, 1)` and a Z-periodic trigonometric kernel `phi: R -> R^d`. From
//! these the crate evaluates
//!
//! * the graph function `W(x) = sum_n lambda^n phi(b^n x)`,
//! * the stable slope field `Y(x, j)` indexed by digit streams `j`,
//! * its integral `Gamma_j` and the flow projection `pi_j(x, y) = y - Gamma_j(x)`,
//! * the expanding map `T`, its local inverses `g_i`, and the graph
//!   flattening map used to split off smooth directions.
//!
//! All evaluations carry explicit truncation budgets derived from geometric
//! tail bounds, so every result comes with a sup-norm error guarantee.

mod barg;
pub mod eval;
pub mod kernel;
pub mod params;
pub mod symbols;

pub use eval::{
    eval_gamma, eval_phi, eval_phi_deriv, eval_w, eval_y, flatten_graph, flow_projection,
    g_apply, hat_level, reduce_mod1, t_apply, transform_residual, Evaluator,
};
pub use kernel::{parse_config, KernelFunction};
pub use params::{Params, TruncationBudget};
pub use symbols::{SymbolStream, Word};

use std::fmt;

/// Errors produced by kernel construction, config parsing and evaluation
/// preconditions.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Parameter pair outside the admissible range (b >= 2, 1/b < lambda < 1).
    InvalidParams(String),
    /// Kernel violates a structural invariant (conjugate symmetry, bounds).
    InvalidKernel(String),
    /// Kernel config text could not be parsed; carries the 1-based line number.
    ConfigParse { line: usize, msg: String },
    /// An operation argument violated its contract (e.g. non-orthonormal basis).
    InputError(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            CoreError::InvalidKernel(msg) => write!(f, "invalid kernel: {msg}"),
            CoreError::ConfigParse { line, msg } => {
                write!(f, "config parse error at line {line}: {msg}")
            }
            CoreError::InputError(msg) => write!(f, "input error: {msg}"),
        }
    }
}

impl std::error::Error for CoreError {}

/// Max deviation of `rows` from being an orthonormal family in `R^dim`.
///
/// Returns the largest |<v_i, v_j> - delta_ij| together with a dimension
/// mismatch guard; `f64::INFINITY` when some row has the wrong length.
pub fn orthonormal_error(rows: &[Vec<f64>], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for (i, vi) in rows.iter().enumerate() {
        if vi.len() != dim {
            return f64::INFINITY;
        }
        for (j, vj) in rows.iter().enumerate() {
            let dot: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}
