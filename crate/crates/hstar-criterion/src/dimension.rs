//! The closed-form graph dimension and its active branch.

use std::fmt;

use weier_core::Params;

/// Which side of the minimum is active in
/// `min(log_{1/lambda} b, 1 + (d - q)(1 + log_b lambda))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimensionBranch {
    /// The Holder bound `log_{1/lambda} b`.
    Holder,
    /// The affine count `1 + (d - q)(1 + log_b lambda)`.
    Affine,
    /// Both branches agree to within relative 1e-12.
    Critical,
}

impl fmt::Display for DimensionBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimensionBranch::Holder => write!(f, "holder"),
            DimensionBranch::Affine => write!(f, "affine"),
            DimensionBranch::Critical => write!(f, "critical"),
        }
    }
}

/// `min(log_{1/lambda} b, 1 + (d - q)(1 + log_b lambda))` with the active
/// branch. Requires `0 <= q <= d`.
pub fn predicted_dimension(p: &Params, d: usize, q: usize) -> (f64, DimensionBranch) {
    assert!(q <= d, "q = {q} must not exceed d = {d}");
    let holder = p.b_f().ln() / (1.0 / p.lambda()).ln();
    let affine = 1.0 + (d - q) as f64 * (1.0 + p.log_b_lambda());
    let scale = holder.abs().max(affine.abs());
    if (holder - affine).abs() <= 1e-12 * scale {
        (affine, DimensionBranch::Critical)
    } else if holder < affine {
        (holder, DimensionBranch::Holder)
    } else {
        (affine, DimensionBranch::Affine)
    }
}
