//! Digit-product measures with analytically exact cell weights.
//!
//! A `ProductMeasure` draws every base-b digit of every coordinate i.i.d.
//! from one digit distribution. Its level-n cell weights depend only on the
//! digit counts, so `H(L_n)` reduces to a sum over digit-count classes
//! (multinomial weights), exact up to floating-point rounding — no point
//! cloud and no Monte-Carlo noise. Uniform and Bernoulli measures are the
//! instances the entropy identities are tested on.

use crate::{LevelEntropy, MeasureError};

#[derive(Clone, Debug, PartialEq)]
pub struct ProductMeasure {
    base: u32,
    dim: usize,
    digit_probs: Vec<f64>,
}

impl ProductMeasure {
    pub fn new(base: u32, dim: usize, mut digit_probs: Vec<f64>) -> Result<Self, MeasureError> {
        if base < 2 || dim == 0 {
            return Err(MeasureError::BadArg(format!(
                "need base >= 2 and dim >= 1, got base {base}, dim {dim}"
            )));
        }
        if digit_probs.len() != base as usize {
            return Err(MeasureError::BadArg(format!(
                "expected {base} digit probabilities, got {}",
                digit_probs.len()
            )));
        }
        if digit_probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(MeasureError::BadWeights(
                "digit probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = digit_probs.iter().sum();
        if total <= 0.0 {
            return Err(MeasureError::BadWeights("zero total probability".into()));
        }
        for p in &mut digit_probs {
            *p /= total;
        }
        Ok(ProductMeasure {
            base,
            dim,
            digit_probs,
        })
    }

    /// Lebesgue measure on `[0,1)^dim` (every digit uniform).
    pub fn uniform(base: u32, dim: usize) -> Self {
        Self::new(base, dim, vec![1.0 / base as f64; base as usize]).expect("uniform is valid")
    }

    /// The dyadic Bernoulli measure: digit 1 with probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self, MeasureError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(MeasureError::BadArg(format!("p = {p} outside [0,1]")));
        }
        Self::new(2, 1, vec![1.0 - p, p])
    }

    /// Entropy of a single digit in base-b units.
    pub fn digit_entropy(&self) -> f64 {
        let log_b = (self.base as f64).ln();
        self.digit_probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln() / log_b)
            .sum()
    }
}

/// All count vectors of length `parts` summing to `total`.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for head in 0..=total {
        for mut rest in compositions(total - head, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(head);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

impl LevelEntropy for ProductMeasure {
    fn base(&self) -> u32 {
        self.base
    }

    fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Exact cell-weight entropy via digit-count classes: a level-n cell is
    /// determined by `n * dim` digits, all i.i.d.; cells with digit counts
    /// `(c_0, ..., c_{b-1})` share the weight `prod p_i^{c_i}` and there are
    /// multinomial-many of them.
    fn level_entropy(&self, n: u32) -> f64 {
        let digits = n * self.dim as u32;
        if digits == 0 {
            return 0.0;
        }
        // ln k! table.
        let mut ln_fact = vec![0.0f64; digits as usize + 1];
        for k in 1..=digits as usize {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let log_b = (self.base as f64).ln();
        let mut h = 0.0f64;
        for counts in compositions(digits, self.base as usize) {
            let mut ln_mult = ln_fact[digits as usize];
            let mut ln_w = 0.0f64;
            let mut possible = true;
            for (c, &p) in counts.iter().zip(&self.digit_probs) {
                ln_mult -= ln_fact[*c as usize];
                if *c > 0 {
                    if p == 0.0 {
                        possible = false;
                        break;
                    }
                    ln_w += *c as f64 * p.ln();
                }
            }
            if !possible {
                continue;
            }
            // multiplicity * w * (-log_b w)
            h += (ln_mult + ln_w).exp() * (-ln_w / log_b);
        }
        h
    }

    fn occupied_cells(&self, n: u32) -> u64 {
        let support = self.digit_probs.iter().filter(|&&p| p > 0.0).count() as u64;
        let mut cells = 1u64;
        for _ in 0..n * self.dim as u32 {
            cells = cells.saturating_mul(support);
        }
        cells
    }

    fn sample_count(&self) -> Option<usize> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_entropy_is_dim_times_n() {
        let m = ProductMeasure::uniform(2, 2);
        for n in 0..=28u32 {
            assert!(
                (m.level_entropy(n) - 2.0 * n as f64).abs() < 1e-9,
                "n={n}: {}",
                m.level_entropy(n)
            );
        }
        let m3 = ProductMeasure::uniform(3, 1);
        assert!((m3.level_entropy(10) - 10.0).abs() < 1e-10);
    }

    #[test]
    fn bernoulli_entropy_matches_the_digit_entropy() {
        let p = 0.3f64;
        let m = ProductMeasure::bernoulli(p).unwrap();
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        assert!((m.digit_entropy() - h).abs() < 1e-15);
        for n in [1u32, 8, 24, 28] {
            assert!(
                (m.level_entropy(n) - n as f64 * h).abs() < 1e-10,
                "n={n}: {} vs {}",
                m.level_entropy(n),
                n as f64 * h
            );
        }
    }

    #[test]
    fn degenerate_digit_distribution_is_a_point_mass() {
        let m = ProductMeasure::new(2, 1, vec![1.0, 0.0]).unwrap();
        assert_eq!(m.level_entropy(12), 0.0);
        assert_eq!(m.occupied_cells(12), 1);
    }

    #[test]
    fn decomposition_residual_vanishes_for_products() {
        let m = ProductMeasure::bernoulli(0.3).unwrap();
        assert!(m.decomposition_residual(24, 4) <= 1e-10);
        let u = ProductMeasure::uniform(2, 2);
        assert!(u.decomposition_residual(24, 4) <= 1e-10);
    }

    #[test]
    fn entropy_slope_is_exact() {
        let m = ProductMeasure::bernoulli(0.3).unwrap();
        let fit = m.entropy_dimension(1, 20);
        let h = m.digit_entropy();
        assert!((fit.slope - h).abs() < 1e-9);
        assert!(fit.undersampled.is_empty());
    }
}
