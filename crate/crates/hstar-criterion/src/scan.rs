//! Grid scan of `(1/b, 1)` for the finitely many degenerate contraction
//! parameters, with surrogate-minimum refinement.
//!
//! The minor sums `D_j(lambda)` are sums of squares, so sign-change
//! bracketing is unavailable; instead the scanner tracks the smallest
//! singular value relevant at the generic degeneracy level `p'` (a continuous
//! surrogate that vanishes linearly at a simple degenerate parameter),
//! refines its local minima by ternary search, and accepts a candidate only
//! if the minimum is consistent with an actual zero at the refinement
//! resolution.

use rayon::prelude::*;
use weier_core::{KernelFunction, Params};

use crate::criterion::{compute_q, compute_q_with_floor, CriterionReport};
use crate::CriterionError;

/// One grid evaluation, as emitted in the scan CSV.
#[derive(Clone, Copy, Debug)]
pub struct GridPoint {
    pub lambda: f64,
    pub q: usize,
    /// Smallest singular value of the stabilized criterion matrix.
    pub sigma_min: f64,
}

/// A refined degenerate parameter.
#[derive(Clone, Copy, Debug)]
pub struct DegenerateLambda {
    pub lambda: f64,
    /// Degeneracy index at the refined parameter (always > p').
    pub q: usize,
    /// Width of the final refinement interval.
    pub width: f64,
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    /// Minimum of `q` over the grid: the generic degeneracy level.
    pub p_prime: usize,
    pub degenerate: Vec<DegenerateLambda>,
    pub grid: Vec<GridPoint>,
    pub grid_n: usize,
    pub rank_tol: f64,
    pub refine_tol: f64,
}

/// Local-minimum prominence: a grid minimum must drop to below this fraction
/// of its two-step neighbors to be treated as a zero candidate.
const PROMINENCE: f64 = 0.45;
/// Probe distance for the vanishing test, in units of `refine_tol`.
const PROBE_SCALE: f64 = 100.0;
/// Acceptance: `s(l*) <= VANISH_FRACTION * max(s(l* +- probe))`, which holds
/// for a linear zero refined to `refine_tol` and fails for a smooth positive
/// minimum.
const VANISH_FRACTION: f64 = 0.2;

struct Probe {
    q: usize,
    singular_values: Vec<f64>,
}

fn probe(
    b: u32,
    k: &KernelFunction,
    lambda: f64,
    rank_tol: f64,
) -> Result<Probe, CriterionError> {
    let p = Params::new(b, lambda).map_err(CriterionError::Core)?;
    let rep: CriterionReport = compute_q(&p, k, rank_tol, 3)?;
    Ok(Probe {
        q: rep.q_prime,
        singular_values: rep.singular_values,
    })
}

/// Scan a uniform grid of `grid_n` interior points of `(1/b, 1)`, locate the
/// parameters where `q > p'`, and refine each to an interval of width
/// `refine_tol`.
pub fn scan_degenerate(
    b: u32,
    k: &KernelFunction,
    grid_n: usize,
    refine_tol: f64,
    rank_tol: f64,
) -> Result<ScanResult, CriterionError> {
    scan_degenerate_range(b, k, (1.0 / b as f64, 1.0), grid_n, refine_tol, rank_tol)
}

/// As [`scan_degenerate`] over a subinterval of `(1/b, 1)`.
pub fn scan_degenerate_range(
    b: u32,
    k: &KernelFunction,
    range: (f64, f64),
    grid_n: usize,
    refine_tol: f64,
    rank_tol: f64,
) -> Result<ScanResult, CriterionError> {
    if k.is_constant() {
        return Err(CriterionError::ConstantKernel);
    }
    if grid_n < 100 {
        return Err(CriterionError::BadArg(format!(
            "grid_n = {grid_n} must be >= 100"
        )));
    }
    if !(refine_tol > 0.0) || !(rank_tol > 0.0) {
        return Err(CriterionError::BadArg(
            "refine_tol and rank_tol must be positive".into(),
        ));
    }
    let (lo, hi) = range;
    if !(lo >= 1.0 / b as f64 && hi <= 1.0 && lo < hi) {
        return Err(CriterionError::BadArg(format!(
            "scan range [{lo}, {hi}] must lie within [1/{b}, 1]"
        )));
    }
    let d = k.d();
    let spacing = (hi - lo) / (grid_n as f64 + 1.0);
    let lambdas: Vec<f64> = (1..=grid_n).map(|i| lo + i as f64 * spacing).collect();

    let probes: Vec<Probe> = lambdas
        .par_iter()
        .map(|&l| probe(b, k, l, rank_tol))
        .collect::<Result<_, _>>()?;

    let p_prime = probes.iter().map(|r| r.q).min().expect("nonempty grid");
    let grid: Vec<GridPoint> = lambdas
        .iter()
        .zip(&probes)
        .map(|(&lambda, r)| GridPoint {
            lambda,
            q: r.q,
            sigma_min: *r.singular_values.last().unwrap_or(&0.0),
        })
        .collect();

    if p_prime == d {
        // q is d everywhere; nothing can exceed it.
        return Ok(ScanResult {
            p_prime,
            degenerate: Vec::new(),
            grid,
            grid_n,
            rank_tol,
            refine_tol,
        });
    }

    // Surrogate: sigma_{d - p'}, the singular value that must vanish for q
    // to exceed p'.
    let sidx = d - p_prime - 1;
    let s: Vec<f64> = probes.iter().map(|r| r.singular_values[sidx]).collect();
    let surrogate = |lambda: f64| -> Result<f64, CriterionError> {
        Ok(probe(b, k, lambda, rank_tol)?.singular_values[sidx])
    };

    // Candidate brackets: direct q-hits plus prominent local minima of s.
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid_n {
        let hit = probes[i].q > p_prime;
        let local_min = i > 0
            && i + 1 < grid_n
            && s[i - 1] >= s[i]
            && s[i] <= s[i + 1]
            && {
                let left = if i >= 2 { s[i - 2] } else { s[i - 1] };
                let right = if i + 2 < grid_n { s[i + 2] } else { s[i + 1] };
                s[i] <= PROMINENCE * left.min(right)
            };
        if hit || local_min {
            let a = if i == 0 { lambdas[0] } else { lambdas[i - 1] };
            let c = if i + 1 == grid_n {
                lambdas[grid_n - 1]
            } else {
                lambdas[i + 1]
            };
            brackets.push((a, c));
        }
    }
    // Merge overlapping brackets.
    brackets.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for br in brackets {
        match merged.last_mut() {
            Some(last) if br.0 <= last.1 => last.1 = last.1.max(br.1),
            _ => merged.push(br),
        }
    }

    let mut degenerate: Vec<DegenerateLambda> = Vec::new();
    for (mut a, mut c) in merged {
        // Ternary search on the surrogate.
        while c - a > refine_tol {
            let m1 = a + (c - a) / 3.0;
            let m2 = c - (c - a) / 3.0;
            if surrogate(m1)? < surrogate(m2)? {
                c = m2;
            } else {
                a = m1;
            }
        }
        let lambda_star = 0.5 * (a + c);
        let width = c - a;
        let s_star = surrogate(lambda_star)?;

        // Vanishing test: at distance `probe` a linear zero rises to
        // slope * probe, so the refined minimum must sit far below it.
        let probe_h = (PROBE_SCALE * refine_tol)
            .min(0.45 * (lambda_star - lo))
            .min(0.45 * (1.0 - lambda_star));
        let s_left = surrogate(lambda_star - probe_h)?;
        let s_right = surrogate(lambda_star + probe_h)?;
        let direct_q = probe(b, k, lambda_star, rank_tol)?.q;
        let vanishes = s_star <= VANISH_FRACTION * s_left.max(s_right);
        if !(direct_q > p_prime || vanishes) {
            continue;
        }

        // Classify q at the refined parameter, flooring out the singular
        // value that the refinement resolution cannot distinguish from zero.
        let q = if direct_q > p_prime {
            direct_q
        } else {
            let p = Params::new(b, lambda_star).map_err(CriterionError::Core)?;
            compute_q_with_floor(&p, k, rank_tol, 3, 2.0 * s_star)?.q_prime
        };
        if q <= p_prime {
            continue;
        }

        // Merge with a previous detection when the refinement landed within
        // two grid cells of it.
        if let Some(last) = degenerate.last() {
            if (lambda_star - last.lambda).abs() <= 2.0 * spacing {
                continue;
            }
        }
        degenerate.push(DegenerateLambda {
            lambda: lambda_star,
            q,
            width,
        });
    }

    Ok(ScanResult {
        p_prime,
        degenerate,
        grid,
        grid_n,
        rank_tol,
        refine_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_the_single_degenerate_parameter() {
        // phi = 0.7 cos(4 pi x) - cos(2 pi x): S_1 = -1/2 + 0.35 / lambda,
        // one root at lambda = 0.7.
        let k = KernelFunction::telescoped(&KernelFunction::cosine(), 2, 0.7).scaled(-1.0);
        let res = scan_degenerate(2, &k, 400, 1e-6, 1e-8).unwrap();
        assert_eq!(res.p_prime, 0);
        assert_eq!(res.degenerate.len(), 1, "detections: {:?}", res.degenerate);
        let hit = &res.degenerate[0];
        assert!((hit.lambda - 0.7).abs() <= 1e-6, "lambda* = {}", hit.lambda);
        assert_eq!(hit.q, 1);
        assert!(hit.width <= 1e-6);
    }

    #[test]
    fn complex_kernel_scan_is_empty() {
        let k = KernelFunction::complex_exp();
        let res = scan_degenerate(2, &k, 200, 1e-6, 1e-8).unwrap();
        assert_eq!(res.p_prime, 0);
        assert!(res.degenerate.is_empty());
        assert_eq!(res.grid.len(), 200);
    }

    #[test]
    fn rejects_constant_kernels_and_tiny_grids() {
        let constant = KernelFunction::from_entries(1, &[(1, 0, 0.4, 0.0)]).unwrap();
        assert!(matches!(
            scan_degenerate(2, &constant, 200, 1e-6, 1e-8),
            Err(CriterionError::ConstantKernel)
        ));
        let k = KernelFunction::cosine();
        assert!(scan_degenerate(2, &k, 99, 1e-6, 1e-8).is_err());
    }
}
