//! Log-regression of occupied-cell counts against the level.

use crate::BoxdimError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxFit {
    pub slope: f64,
    pub stderr: f64,
}

/// Least-squares slope of `log_b N_n` against `n` over the inclusive level
/// range `fit`, with standard error. Requires at least three levels in
/// range.
pub fn estimate_box_dimension(
    base: u32,
    counts: &[(u32, u64)],
    fit: (u32, u32),
) -> Result<BoxFit, BoxdimError> {
    let log_b = (base as f64).ln();
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(n, _)| *n >= fit.0 && *n <= fit.1)
        .map(|&(n, c)| (n as f64, (c.max(1) as f64).ln() / log_b))
        .collect();
    if pts.len() < 3 {
        return Err(BoxdimError::FitRange(format!(
            "need >= 3 levels in {:?}, have {}",
            fit,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let stderr = if pts.len() > 2 {
        (ss_res / ((n - 2.0) * sxx)).sqrt()
    } else {
        0.0
    };
    Ok(BoxFit { slope, stderr })
}
