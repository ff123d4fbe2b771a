//! The lacunary coefficient series `S_t(lambda)` and the criterion matrices
//! `A_{lambda,m}` built from their real and imaginary parts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use weier_core::{KernelFunction, Params};

use crate::lacunary::lacunary_index;
use crate::CriterionError;

/// `a_m(phi_j)` for a 1-based coordinate; zero for frequencies the kernel
/// does not store (exact for trigonometric polynomials, DFT values with a
/// recorded aliasing bound for ingested kernels).
pub fn fourier_coeff(
    k: &KernelFunction,
    coord: usize,
    m: i64,
) -> Result<Complex64, CriterionError> {
    if coord == 0 || coord > k.d() {
        return Err(CriterionError::CoordOutOfRange { coord, d: k.d() });
    }
    Ok(k.coeff(coord - 1, m))
}

/// One evaluated series `S = sum_{n=0}^N a_{t b^n}(phi_j) lambda^-n`.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: Complex64,
    /// `sum_n |a_{t b^n}| lambda^-n`: the scale against which round-off in
    /// `value` must be judged.
    pub magnitude: f64,
    /// Bound on the omitted tail (zero for trigonometric polynomials).
    pub tail_bound: f64,
}

/// Evaluate the lacunary series for coordinate `coord` (1-based) and base
/// index `t` with `b` not dividing `t`.
///
/// For a trigonometric polynomial the sum is finite and exact. For an
/// ingested kernel the coefficients beyond the stored support are bounded by
/// the recorded decay model and folded into `tail_bound`.
pub fn series_s(
    p: &Params,
    k: &KernelFunction,
    coord: usize,
    t: u64,
) -> Result<SeriesValue, CriterionError> {
    if coord == 0 || coord > k.d() {
        return Err(CriterionError::CoordOutOfRange { coord, d: k.d() });
    }
    if t == 0 || t % p.b() as u64 == 0 {
        return Err(CriterionError::NotLacunary { t, b: p.b() });
    }
    let max_freq = k.max_freq();
    let mut value = Complex64::ZERO;
    let mut magnitude = 0.0f64;
    let mut weight_sum = 0.0f64;
    let mut freq = t;
    let mut weight = 1.0f64; // lambda^-n
    while freq <= max_freq {
        let a = k.coeff(coord - 1, freq as i64);
        value += a * weight;
        magnitude += a.norm() * weight;
        weight_sum += weight;
        match freq.checked_mul(p.b() as u64) {
            Some(f) => freq = f,
            None => {
                freq = u64::MAX;
                break;
            }
        }
        weight /= p.lambda();
    }
    // `freq`/`weight` now point at the first term beyond the stored support.
    let mut tail_bound = k.alias_bound() * weight_sum;
    if let Some(c3) = k.decay3() {
        let first = c3 / (std::f64::consts::TAU * freq as f64).powi(3) * weight;
        let ratio = 1.0 / (p.b_f().powi(3) * p.lambda());
        tail_bound += first / (1.0 - ratio);
    }
    Ok(SeriesValue {
        value,
        magnitude,
        tail_bound,
    })
}

/// The matrix `A_{lambda,m}`: row `j`, columns `R_{j,1}..R_{j,m}` followed by
/// `I_{j,1}..I_{j,m}` where `R`/`I` are the real and imaginary parts of the
/// series for the first `m` lacunary indices.
#[derive(Clone, Debug)]
pub struct CriterionMatrix {
    lambda: f64,
    pairs: usize,
    entries: DMatrix<f64>,
    magnitude: f64,
    tail_bound: f64,
}

impl CriterionMatrix {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Column-pair count `m` (the matrix is `d x 2m`).
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Largest series magnitude; sets the round-off noise scale of the matrix.
    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Largest per-entry tail bound (nonzero only for ingested kernels).
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

pub fn build_matrix(
    p: &Params,
    k: &KernelFunction,
    m: usize,
) -> Result<CriterionMatrix, CriterionError> {
    if m == 0 {
        return Err(CriterionError::BadArg("column-pair count m must be >= 1".into()));
    }
    let d = k.d();
    let mut entries = DMatrix::zeros(d, 2 * m);
    let mut magnitude = 0.0f64;
    let mut tail_bound = 0.0f64;
    for c in 1..=m {
        let t = lacunary_index(p.b(), c);
        for j in 1..=d {
            let s = series_s(p, k, j, t)?;
            entries[(j - 1, c - 1)] = s.value.re;
            entries[(j - 1, m + c - 1)] = s.value.im;
            magnitude = magnitude.max(s.magnitude);
            tail_bound = tail_bound.max(s.tail_bound);
        }
    }
    Ok(CriterionMatrix {
        lambda: p.lambda(),
        pairs: m,
        entries,
        magnitude,
        tail_bound,
    })
}
