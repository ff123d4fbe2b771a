//! Enumeration of the lacunary base indices `t_1 < t_2 < ...` (the positive
//! integers not divisible by `b`) and the genericity perturbation built on
//! them.

use num_complex::Complex64;
use weier_core::KernelFunction;

use crate::CriterionError;

/// A positive integer `t` with `b` not dividing `t`, together with its
/// 1-based position in the ascending enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LacunaryIndex {
    pub t: u64,
    pub ordinal: usize,
}

impl LacunaryIndex {
    /// The `m`-th index (1-based): `t_m = m + (m - 1) / (b - 1)`.
    pub fn nth(b: u32, m: usize) -> Self {
        LacunaryIndex {
            t: lacunary_index(b, m),
            ordinal: m,
        }
    }

    /// Validate `t` and recover its ordinal.
    pub fn from_t(b: u32, t: u64) -> Result<Self, CriterionError> {
        if t == 0 || t % b as u64 == 0 {
            return Err(CriterionError::NotLacunary { t, b });
        }
        // Among 1..=t there are floor(t/b) multiples of b.
        Ok(LacunaryIndex {
            t,
            ordinal: (t - t / b as u64) as usize,
        })
    }
}

/// The `m`-th positive integer not divisible by `b`, 1-based.
pub fn lacunary_index(b: u32, m: usize) -> u64 {
    debug_assert!(b >= 2 && m >= 1);
    m as u64 + (m as u64 - 1) / (b as u64 - 1)
}

/// Subtract `2 r cos(2 pi t_j x)` from coordinate `j` for `j = 1..=d`, which
/// shifts the diagonal of the leading d x d criterion block by `-r` and
/// makes the kernel generic for all but finitely many `r`.
pub fn perturb_to_generic(
    b: u32,
    k: &KernelFunction,
    r: f64,
    count: usize,
) -> Result<KernelFunction, CriterionError> {
    if count != k.d() {
        return Err(CriterionError::BadArg(format!(
            "perturbation count {count} must equal the kernel dimension {}",
            k.d()
        )));
    }
    let mut out = k.clone();
    for j in 0..k.d() {
        let t = lacunary_index(b, j + 1);
        out = out.coeff_delta(j, t, Complex64::new(-r, 0.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_skips_multiples_of_b() {
        let expect_b2: Vec<u64> = vec![1, 3, 5, 7, 9, 11];
        for (i, &t) in expect_b2.iter().enumerate() {
            assert_eq!(lacunary_index(2, i + 1), t);
        }
        let expect_b3: Vec<u64> = vec![1, 2, 4, 5, 7, 8, 10];
        for (i, &t) in expect_b3.iter().enumerate() {
            assert_eq!(lacunary_index(3, i + 1), t);
        }
    }

    #[test]
    fn ordinal_round_trip() {
        for b in [2u32, 3, 5] {
            for m in 1..=50 {
                let idx = LacunaryIndex::nth(b, m);
                let back = LacunaryIndex::from_t(b, idx.t).unwrap();
                assert_eq!(back.ordinal, m);
            }
        }
        assert!(LacunaryIndex::from_t(2, 6).is_err());
        assert!(LacunaryIndex::from_t(3, 9).is_err());
    }

    #[test]
    fn zero_radius_perturbation_is_identity() {
        let k = KernelFunction::complex_exp();
        let p = perturb_to_generic(2, &k, 0.0, 2).unwrap();
        assert_eq!(p, k);
        assert!(perturb_to_generic(2, &k, 0.1, 1).is_err());
    }

    #[test]
    fn perturbation_shifts_the_lacunary_coefficients() {
        let k = KernelFunction::zero(2);
        let p = perturb_to_generic(2, &k, 0.5, 2).unwrap();
        // t_1 = 1 on coordinate 1, t_2 = 3 on coordinate 2.
        assert_eq!(p.coeff(0, 1), Complex64::new(-0.5, 0.0));
        assert_eq!(p.coeff(1, 3), Complex64::new(-0.5, 0.0));
        assert_eq!(p.coeff(0, 3), Complex64::ZERO);
    }
}
