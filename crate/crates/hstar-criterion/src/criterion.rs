//! Computation of the degeneracy index `q(phi, lambda, b)` through kernel
//! stabilization over growing criterion matrices.

use weier_core::{KernelFunction, Params};

use crate::rank::{kernel_space_with_floor, minor_sum_l};
use crate::series::build_matrix;
use crate::CriterionError;

/// Hard cap on the column-pair count during stabilization. The kernels are
/// nested, so the dimension is nonincreasing and some finite `m` suffices;
/// hitting the cap is reported rather than treated as convergence.
pub const M_CAP: usize = 64;

/// Result of a degeneracy-index computation at one `lambda`.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    /// `q = dim` of the stabilized left kernel, in `0..=d`.
    pub q_prime: usize,
    /// Orthonormal rows spanning the kernel (the smooth subspace V).
    pub kernel_basis: Vec<Vec<f64>>,
    /// All `d` singular values at the stabilized matrix, descending.
    pub singular_values: Vec<f64>,
    /// Column-pair count at which the kernel dimension stabilized.
    pub m_used: usize,
    /// `sigma_{d-q} / sigma_{d-q+1}`: the separation between the retained
    /// and discarded singular values. Infinity when `q = d`; for `q = 0` the
    /// margin `sigma_d / threshold` above the zero cut is reported instead.
    pub sigma_gap: f64,
    /// True when the stabilization loop hit [`M_CAP`] before seeing the
    /// required number of consecutive equal dimensions.
    pub m_capped: bool,
    pub lambda: f64,
}

/// Compute `q(phi, lambda, b)` by iterating `m = d, d+1, ...` until the left
/// kernel dimension is unchanged for `m_stable` consecutive values of `m`.
pub fn compute_q(
    p: &Params,
    k: &KernelFunction,
    rank_tol: f64,
    m_stable: usize,
) -> Result<CriterionReport, CriterionError> {
    compute_q_with_floor(p, k, rank_tol, m_stable, 0.0)
}

/// As [`compute_q`] with an extra absolute singular-value floor, used by the
/// scanner to classify parameters found by refinement (where the vanishing
/// singular value is only as small as the refinement width allows).
pub fn compute_q_with_floor(
    p: &Params,
    k: &KernelFunction,
    rank_tol: f64,
    m_stable: usize,
    extra_floor: f64,
) -> Result<CriterionReport, CriterionError> {
    if m_stable < 2 {
        return Err(CriterionError::BadArg(format!(
            "m_stable = {m_stable} must be >= 2"
        )));
    }
    let d = k.d();
    let mut m = d.max(1);
    let mut run_dim = usize::MAX;
    let mut run_len = 0usize;
    loop {
        let mat = build_matrix(p, k, m)?;
        let ks = kernel_space_with_floor(&mat, rank_tol, extra_floor)?;
        if ks.dim == run_dim {
            run_len += 1;
        } else {
            run_dim = ks.dim;
            run_len = 1;
        }
        if run_len >= m_stable || m >= M_CAP {
            let rank = d - ks.dim;
            let sigma_gap = if ks.dim == d {
                f64::INFINITY
            } else if ks.dim == 0 {
                ks.singular_values[d - 1] / ks.threshold
            } else {
                let below = ks.singular_values[rank];
                if below == 0.0 {
                    f64::INFINITY
                } else {
                    ks.singular_values[rank - 1] / below
                }
            };
            return Ok(CriterionReport {
                q_prime: ks.dim,
                kernel_basis: ks.basis,
                singular_values: ks.singular_values,
                m_used: m,
                sigma_gap,
                m_capped: run_len < m_stable,
                lambda: p.lambda(),
            });
        }
        m += 1;
    }
}

/// The `m`-th entry of the minor-sum sequence `D_j(lambda)`: the sum of
/// squared `j x j` minors of `A_{lambda,m}`.
pub fn compute_d(
    p: &Params,
    k: &KernelFunction,
    j: usize,
    m: usize,
) -> Result<f64, CriterionError> {
    if j == 0 || j > k.d() {
        return Err(CriterionError::CoordOutOfRange { coord: j, d: k.d() });
    }
    let mat = build_matrix(p, k, m)?;
    minor_sum_l(mat.entries(), j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cohomological(b: u32, l0: f64) -> KernelFunction {
        KernelFunction::telescoped(&KernelFunction::cosine(), b, l0).scaled(-1.0)
    }

    #[test]
    fn complex_kernel_is_never_degenerate() {
        // Corollary form 3 + 2 log_b lambda of the closed dimension formula
        // forces d - q = 2 for the complex-exponential kernel.
        let k = KernelFunction::complex_exp();
        for l in [0.6, 0.7, 0.8, 0.9] {
            let p = Params::new(2, l).unwrap();
            let rep = compute_q(&p, &k, 1e-8, 3).unwrap();
            assert_eq!(rep.q_prime, 0, "lambda={l}");
            assert!(!rep.m_capped);
        }
    }

    #[test]
    fn cohomological_kernel_is_degenerate_exactly_at_its_root() {
        let l0 = 0.7;
        let k = cohomological(2, l0);
        let at_root = compute_q(&Params::new(2, l0).unwrap(), &k, 1e-8, 3).unwrap();
        assert_eq!(at_root.q_prime, 1);
        for l in [l0 - 0.05, l0 + 0.05] {
            let rep = compute_q(&Params::new(2, l).unwrap(), &k, 1e-8, 3).unwrap();
            assert_eq!(rep.q_prime, 0, "lambda={l}");
            assert!(rep.sigma_gap > 1e3);
        }
    }

    #[test]
    fn telescoping_kernels_have_full_degeneracy_at_their_parameter() {
        // phi = w0 - lambda w0(b .) gives W = w0, smooth in every direction.
        let w0 = KernelFunction::from_entries(
            2,
            &[(1, 1, 0.5, 0.0), (1, 2, 0.0, -0.15), (2, 1, 0.0, -0.5), (2, 3, 0.2, 0.1)],
        )
        .unwrap();
        for (b, l) in [(2u32, 0.7f64), (3, 0.5)] {
            let k = KernelFunction::telescoped(&w0, b, l);
            let rep = compute_q(&Params::new(b, l).unwrap(), &k, 1e-8, 3).unwrap();
            assert_eq!(rep.q_prime, 2, "b={b} lambda={l}");
            assert_eq!(rep.sigma_gap, f64::INFINITY);
        }
    }

    #[test]
    fn mixed_kernel_reports_the_smooth_direction() {
        let l0 = 0.7;
        let mut entries = vec![(1usize, 1u64, 0.5, 0.0)];
        let coh = cohomological(2, l0);
        entries.push((2, 1, coh.coeff(0, 1).re, coh.coeff(0, 1).im));
        entries.push((2, 2, coh.coeff(0, 2).re, coh.coeff(0, 2).im));
        let k = KernelFunction::from_entries(2, &entries).unwrap();
        let rep = compute_q(&Params::new(2, l0).unwrap(), &k, 1e-8, 3).unwrap();
        assert_eq!(rep.q_prime, 1);
        assert!(rep.kernel_basis[0][0].abs() < 1e-9);
        assert!((rep.kernel_basis[0][1].abs() - 1.0) < 1e-9);
    }

    #[test]
    fn perturbed_degenerate_kernel_becomes_generic() {
        let l0 = 0.7;
        let k = cohomological(2, l0);
        let perturbed = crate::lacunary::perturb_to_generic(2, &k, 0.1, 1).unwrap();
        // S_1(lambda) = -0.5 - 0.1 + 0.35 / lambda, nonzero at lambda = 0.7.
        let rep = compute_q(&Params::new(2, l0).unwrap(), &perturbed, 1e-8, 3).unwrap();
        assert_eq!(rep.q_prime, 0);
    }

    #[test]
    fn minor_sums_match_the_closed_forms() {
        let p = Params::new(2, 0.7).unwrap();
        let cos = KernelFunction::cosine();
        // L_1 of the 1 x 2 row (1/2, 0) is 1/4.
        assert!((compute_d(&p, &cos, 1, 1).unwrap() - 0.25).abs() < 1e-15);
        let k = cohomological(2, 0.7);
        assert!(compute_d(&p, &k, 1, 1).unwrap().abs() < 1e-28);
        let z = KernelFunction::zero(2);
        assert_eq!(compute_d(&p, &z, 2, 3).unwrap(), 0.0);
        assert!(compute_d(&p, &z, 3, 3).is_err());
    }

    #[test]
    fn stabilization_arguments_are_validated() {
        let p = Params::new(2, 0.7).unwrap();
        let k = KernelFunction::cosine();
        assert!(compute_q(&p, &k, 1e-8, 1).is_err());
        assert!(compute_q(&p, &k, 0.0, 3).is_err());
    }
}
