//! Left null spaces with tolerance-aware rank decisions, and the squared
//! minor sums that provide an independent algebraic route to the same rank.

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::series::CriterionMatrix;
use crate::CriterionError;

/// Round-off multiplier for the absolute noise floor: singular values below
/// `ROUND_FACTOR * eps * magnitude` are indistinguishable from zero given how
/// the matrix entries were accumulated.
const ROUND_FACTOR: f64 = 64.0;

/// A computed left null space `{ y : y A = 0 }`.
#[derive(Clone, Debug)]
pub struct KernelSpace {
    pub dim: usize,
    /// Orthonormal rows spanning the space.
    pub basis: Vec<Vec<f64>>,
    /// All `d` singular values, descending.
    pub singular_values: Vec<f64>,
    /// The cut below which singular values counted as zero.
    pub threshold: f64,
}

/// Left null space of a criterion matrix with relative rank tolerance
/// `rank_tol` (singular values below `rank_tol * sigma_max` count as zero).
pub fn kernel_space(m: &CriterionMatrix, rank_tol: f64) -> Result<KernelSpace, CriterionError> {
    kernel_space_with_floor(m, rank_tol, 0.0)
}

/// As [`kernel_space`], with an additional absolute floor below which
/// singular values count as zero. The floor is always at least the round-off
/// noise of the matrix entries plus any series tail bound, so a matrix whose
/// entries are numerically zero yields the full space rather than a rank
/// decision driven by last-ulp residue.
pub fn kernel_space_with_floor(
    m: &CriterionMatrix,
    rank_tol: f64,
    extra_floor: f64,
) -> Result<KernelSpace, CriterionError> {
    if !(rank_tol > 0.0) {
        return Err(CriterionError::BadArg("rank_tol must be positive".into()));
    }
    let d = m.entries().nrows();
    let noise = ROUND_FACTOR * f64::EPSILON * m.magnitude()
        + m.tail_bound() * (2.0 * m.pairs() as f64).sqrt();
    let floor = noise.max(extra_floor);

    // Pad with zero columns so the economy SVD always yields d left vectors.
    let cols = m.entries().ncols().max(d);
    let mut padded = DMatrix::zeros(d, cols);
    padded.view_mut((0, 0), (d, m.entries().ncols())).copy_from(m.entries());

    let svd = padded.svd(true, false);
    let u = svd.u.expect("SVD with u requested");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = singular_values.first().cloned().unwrap_or(0.0);
    let threshold = (rank_tol * sigma_max).max(floor);

    if sigma_max <= threshold {
        // Numerically the zero matrix: full space, standard basis.
        let basis = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        return Ok(KernelSpace {
            dim: d,
            basis,
            singular_values,
            threshold,
        });
    }

    let rank = singular_values.iter().filter(|&&s| s > threshold).count();
    let basis = order[rank..]
        .iter()
        .map(|&i| u.column(i).iter().cloned().collect())
        .collect();
    Ok(KernelSpace {
        dim: d - rank,
        basis,
        singular_values,
        threshold,
    })
}

/// `L_k(B) = sum over all k x k row/column subsets of det^2`, enumerated
/// combinatorially. This is the algebraic rank witness: the largest `k` with
/// `L_k(B) != 0` equals the rank, independently of any SVD.
pub fn minor_sum_l(b: &DMatrix<f64>, k: usize) -> Result<f64, CriterionError> {
    let (rows, cols) = b.shape();
    if k == 0 || k > rows.min(cols) {
        return Err(CriterionError::MinorOrder { k, rows, cols });
    }
    let mut sum = 0.0f64;
    for row_set in (0..rows).combinations(k) {
        for col_set in (0..cols).combinations(k) {
            let mut sub = DMatrix::zeros(k, k);
            for (si, &ri) in row_set.iter().enumerate() {
                for (sj, &cj) in col_set.iter().enumerate() {
                    sub[(si, sj)] = b[(ri, cj)];
                }
            }
            let det = sub.determinant();
            sum += det * det;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::build_matrix;
    use weier_core::{KernelFunction, Params};

    #[test]
    fn minor_sums_of_small_matrices() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(minor_sum_l(&id, 2).unwrap(), 1.0);
        assert_eq!(minor_sum_l(&id, 1).unwrap(), 2.0);

        let diag = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]);
        assert!((minor_sum_l(&diag, 2).unwrap() - 0.0625).abs() < 1e-15);

        let zero = DMatrix::<f64>::zeros(3, 4);
        assert_eq!(minor_sum_l(&zero, 2).unwrap(), 0.0);
        assert!(minor_sum_l(&zero, 4).is_err());
        assert!(minor_sum_l(&zero, 0).is_err());
    }

    #[test]
    fn full_rank_matrix_has_trivial_kernel() {
        let k = KernelFunction::complex_exp();
        let p = Params::new(2, 0.8).unwrap();
        let m = build_matrix(&p, &k, 1).unwrap();
        let ks = kernel_space(&m, 1e-8).unwrap();
        assert_eq!(ks.dim, 0);
        assert!(ks.basis.is_empty());
        assert!((ks.singular_values[0] - 0.5).abs() < 1e-12);
        assert!((ks.singular_values[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_yields_the_full_space() {
        let k = KernelFunction::zero(2);
        let p = Params::new(2, 0.8).unwrap();
        let m = build_matrix(&p, &k, 2).unwrap();
        let ks = kernel_space(&m, 1e-8).unwrap();
        assert_eq!(ks.dim, 2);
        assert_eq!(ks.basis, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn mixed_kernel_has_a_one_dimensional_left_kernel_at_the_root() {
        // phi = (cos 2 pi x, l0 cos(2 pi b x) - cos 2 pi x) at lambda = l0:
        // rows (1/2, 0) and (0, 0) up to round-off, kernel spanned by e2.
        let l0 = 0.7;
        let cohom = KernelFunction::telescoped(&KernelFunction::cosine(), 2, l0).scaled(-1.0);
        let k = KernelFunction::from_entries(
            2,
            &[(1, 1, 0.5, 0.0), (2, 1, -0.5, 0.0), (2, 2, 0.35, 0.0)],
        )
        .unwrap();
        // Sanity: coordinate 2 of `k` matches the cohomological kernel.
        assert_eq!(k.coeff(1, 1), cohom.coeff(0, 1));
        assert_eq!(k.coeff(1, 2), cohom.coeff(0, 2));

        let p = Params::new(2, l0).unwrap();
        let m = build_matrix(&p, &k, 1).unwrap();
        let ks = kernel_space(&m, 1e-8).unwrap();
        assert_eq!(ks.dim, 1);
        let v = &ks.basis[0];
        assert!(v[0].abs() < 1e-9);
        assert!((v[1].abs() - 1.0).abs() < 1e-9);
    }
}
