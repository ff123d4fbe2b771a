//! The level-entropy interface shared by point-cloud and product measures,
//! with the derived conditional entropy, decomposition residual, and
//! entropy-dimension regression.

/// Entropy-dimension fit: least-squares slope of `H(L_n)` against `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropySlope {
    pub slope: f64,
    pub stderr: f64,
    /// Levels excluded from the fit because the occupied-cell count was too
    /// close to the sample count to trust the cell weights.
    pub undersampled: Vec<u32>,
}

pub trait LevelEntropy {
    fn base(&self) -> u32;
    fn ambient_dim(&self) -> usize;

    /// `H(omega, L_n)` in base-b units, with the convention `0 log 0 = 0`.
    fn level_entropy(&self, n: u32) -> f64;

    /// Number of cells of positive mass at level `n`.
    fn occupied_cells(&self, n: u32) -> u64;

    /// Number of atoms for sampled measures; `None` for exact measures.
    fn sample_count(&self) -> Option<usize>;

    /// `H(L_fine) - H(L_coarse)`, the refinement identity for conditional
    /// entropy.
    fn conditional_entropy(&self, n_fine: u32, n_coarse: u32) -> f64 {
        assert!(n_fine >= n_coarse, "need n_fine >= n_coarse");
        self.level_entropy(n_fine) - self.level_entropy(n_coarse)
    }

    /// `|1/n H(L_n) - avg_{0<=i<n} (1/m) H(L_{i+m} | L_i)|`, which the
    /// component decomposition bounds by `O((m + log R)/n)`.
    fn decomposition_residual(&self, n: u32, m: u32) -> f64 {
        assert!(n >= m && m >= 1, "need n >= m >= 1");
        let lhs = self.level_entropy(n) / n as f64;
        let mut sum = 0.0f64;
        for i in 0..n {
            sum += (self.level_entropy(i + m) - self.level_entropy(i)) / m as f64;
        }
        (lhs - sum / n as f64).abs()
    }

    /// Least-squares slope of `H(L_n)` over `n0..=n1`, with standard error.
    ///
    /// For sampled measures, levels where the occupied-cell count exceeds
    /// 1/50 of the sample count are recorded as undersampled and dropped
    /// from the fit (unless that would leave fewer than two levels, in which
    /// case all levels are used and flagged).
    fn entropy_dimension(&self, n0: u32, n1: u32) -> EntropySlope {
        assert!(n1 > n0, "need n1 > n0");
        let mut usable: Vec<(u32, f64)> = Vec::new();
        let mut undersampled = Vec::new();
        for n in n0..=n1 {
            let h = self.level_entropy(n);
            let ok = match self.sample_count() {
                Some(m) => self.occupied_cells(n) < (m as u64 / 50).max(2),
                None => true,
            };
            if ok {
                usable.push((n, h));
            } else {
                undersampled.push(n);
            }
        }
        if usable.len() < 2 {
            usable = (n0..=n1).map(|n| (n, self.level_entropy(n))).collect();
            undersampled = (n0..=n1).collect();
        }
        let (slope, stderr) = least_squares(&usable);
        EntropySlope {
            slope,
            stderr,
            undersampled,
        }
    }
}

fn least_squares(points: &[(u32, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|&(x, _)| x as f64).sum::<f64>() / n;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points
        .iter()
        .map(|&(x, _)| (x as f64 - mean_x).powi(2))
        .sum();
    let sxy: f64 = points
        .iter()
        .map(|&(x, y)| (x as f64 - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    if points.len() <= 2 {
        return (slope, 0.0);
    }
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| (y - slope * x as f64 - intercept).powi(2))
        .sum();
    let stderr = (ss_res / ((n - 2.0) * sxx)).sqrt();
    (slope, stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::EmpiricalMeasure;

    #[test]
    fn uniform_exact_slope_is_the_dimension() {
        let m = EmpiricalMeasure::uniform_grid(2, 5, 2);
        let fit = m.entropy_dimension(1, 5);
        assert!((fit.slope - 2.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!(fit.stderr < 1e-9);
    }

    #[test]
    fn bernoulli_slope_is_the_digit_entropy() {
        let p = 0.3f64;
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        let m = EmpiricalMeasure::bernoulli_dyadic(p, 12);
        let fit = m.entropy_dimension(1, 10);
        assert!((fit.slope - h).abs() < 1e-9, "slope {}", fit.slope);
    }

    #[test]
    fn point_mass_slope_is_zero() {
        let m = EmpiricalMeasure::point_mass(2, vec![0.6]);
        let fit = m.entropy_dimension(1, 6);
        assert_eq!(fit.slope, 0.0);
    }

    #[test]
    fn conditional_entropy_of_uniform() {
        let m = EmpiricalMeasure::uniform_grid(2, 8, 1);
        // (n + m, n) -> m for the uniform measure.
        assert!((m.conditional_entropy(7, 4) - 3.0).abs() < 1e-10);
        assert_eq!(m.conditional_entropy(5, 5), 0.0);
    }
}
