//! Parameter pair `(b, lambda)` and truncation budgets for the series sums.

use crate::barg::MAX_BASE;
use crate::kernel::KernelFunction;
use crate::CoreError;

/// The pair `(b, lambda)` with the derived rate `gamma = 1/(b*lambda)`.
///
/// Invariants enforced at construction: `b >= 2` and `1/b < lambda < 1`,
/// which puts `gamma` in `(1/b, 1)` as well.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    b: u32,
    lambda: f64,
    gamma: f64,
}

impl Params {
    pub fn new(b: u32, lambda: f64) -> Result<Self, CoreError> {
        if b < 2 {
            return Err(CoreError::InvalidParams(format!("base b = {b} must be >= 2")));
        }
        if b > MAX_BASE {
            return Err(CoreError::InvalidParams(format!(
                "base b = {b} exceeds the supported maximum {MAX_BASE}"
            )));
        }
        let bf = b as f64;
        if !(lambda > 1.0 / bf && lambda < 1.0) {
            return Err(CoreError::InvalidParams(format!(
                "lambda = {lambda} must lie in (1/{b}, 1)"
            )));
        }
        Ok(Params {
            b,
            lambda,
            gamma: 1.0 / (bf * lambda),
        })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn b_f(&self) -> f64 {
        self.b as f64
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `gamma = 1/(b*lambda)`, the contraction rate of the stable slope series.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `log_b lambda` (negative).
    pub fn log_b_lambda(&self) -> f64 {
        self.lambda.ln() / self.b_f().ln()
    }

    /// Holder exponent `log_b (1/lambda)` of the graph function.
    pub fn holder_exponent(&self) -> f64 {
        -self.log_b_lambda()
    }
}

/// Term counts for the `W` and `Y`/`Gamma` series plus the sup-norm tail
/// tolerance they guarantee.
///
/// The bounds are the plain geometric tails
/// `||phi||_inf * lambda^(n_w+1) / (1 - lambda) <= tol` and
/// `||phi'||_inf * gamma^(n_y+1) / (1 - gamma) <= tol`, with the sup norms
/// replaced by their Fourier l1 upper bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationBudget {
    n_w: usize,
    n_y: usize,
    tol: f64,
}

impl TruncationBudget {
    /// Smallest budgets meeting `tol` for the given kernel and parameters.
    pub fn for_kernel(p: &Params, k: &KernelFunction, tol: f64) -> Result<Self, CoreError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CoreError::InvalidParams(format!(
                "tolerance {tol} must be positive and finite"
            )));
        }
        let n_w = geometric_terms(k.l1_bound(), p.lambda(), tol);
        let n_y = geometric_terms(k.deriv_l1_bound(1), p.gamma(), tol);
        Ok(TruncationBudget { n_w, n_y, tol })
    }

    /// Explicit budgets; callers take responsibility for the tail invariant.
    pub fn with_terms(n_w: usize, n_y: usize, tol: f64) -> Self {
        TruncationBudget { n_w, n_y, tol }
    }

    /// Same tolerance with doubled term counts, for budget-stability checks.
    pub fn doubled(&self) -> Self {
        TruncationBudget {
            n_w: self.n_w * 2 + 1,
            n_y: self.n_y * 2 + 1,
            tol: self.tol,
        }
    }

    pub fn n_w(&self) -> usize {
        self.n_w
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// Smallest n >= 0 with `c * rate^(n+1) / (1 - rate) <= tol`.
fn geometric_terms(c: f64, rate: f64, tol: f64) -> usize {
    debug_assert!((0.0..1.0).contains(&rate));
    if c <= 0.0 {
        return 0;
    }
    let threshold = tol * (1.0 - rate) / c;
    if threshold >= rate {
        return 0;
    }
    // n + 1 >= log(threshold) / log(rate); then nudge for round-off.
    let mut n = ((threshold.ln() / rate.ln()).ceil() as usize).saturating_sub(1);
    while c * rate.powi(n as i32 + 1) / (1.0 - rate) > tol {
        n += 1;
    }
    while n > 0 && c * rate.powi(n as i32) / (1.0 - rate) <= tol {
        n -= 1;
    }
    n
}
