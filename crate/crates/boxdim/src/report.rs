//! The consolidated dimension report: predicted formula value, box counts
//! with stability screening, the fitted slope, and the optional
//! entropy-dimension cross-check.

use serde::Serialize;
use weier_core::{KernelFunction, Params, TruncationBudget};

use entropy_measures::{random_stream, sample_flow_projection, LevelEntropy};
use hstar_criterion::{compute_q, predicted_dimension};

use crate::count::box_count;
use crate::regression::estimate_box_dimension;
use crate::BoxdimError;

/// Options for the entropy-dimension section.
#[derive(Clone, Debug)]
pub struct EntropyOptions {
    pub samples: usize,
    /// Level range for the slope fit; `None` picks `[2, n_max]` where
    /// `n_max` is the deepest level that stays clear of undersampling.
    pub levels: Option<(u32, u32)>,
    pub stream_cycle: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions {
            samples: 1_000_000,
            levels: None,
            stream_cycle: 64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    /// Levels to count; the two coarsest are dropped from the default fit.
    pub levels: Vec<u32>,
    /// Explicit fit range (inclusive); `None` = levels minus the two
    /// coarsest.
    pub fit_levels: Option<(u32, u32)>,
    pub oversample: u32,
    pub tol: f64,
    pub rank_tol: f64,
    pub m_stable: usize,
    /// Re-count each level at doubled oversampling and drop levels whose
    /// count moves by 2% or more.
    pub stability_check: bool,
    pub entropy: Option<EntropyOptions>,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            levels: (1..=7).collect(),
            fit_levels: None,
            oversample: 4,
            tol: 1e-10,
            rank_tol: 1e-8,
            m_stable: 3,
            stability_check: true,
            entropy: None,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub b: u32,
    pub lambda: f64,
    pub d: usize,
    pub q: usize,
    pub sigma_gap: f64,
    pub m_used: usize,
    pub predicted: f64,
    pub branch: String,
    pub levels: Vec<u32>,
    pub counts: Vec<u64>,
    pub fit_lo: u32,
    pub fit_hi: u32,
    pub dropped_levels: Vec<u32>,
    pub slope: f64,
    pub stderr: f64,
    pub alpha: Option<f64>,
    pub alpha_stderr: Option<f64>,
    pub alpha_levels: Option<(u32, u32)>,
    /// Ledrappier-Young consistency value `1 + (1 + log_b lambda) alpha`.
    pub ly_dim: Option<f64>,
    pub warnings: Vec<String>,
    pub oversample: u32,
    pub seed: u64,
}

impl DimensionReport {
    /// Plain-text rendering for the terminal.
    pub fn human_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "b={} lambda={} d={} q={} (sigma_gap={:.3e}, m={})\n",
            self.b, self.lambda, self.d, self.q, self.sigma_gap, self.m_used
        ));
        s.push_str(&format!(
            "predicted dimension = {:.6} [{} branch]\n",
            self.predicted, self.branch
        ));
        s.push_str("level  count\n");
        for (n, c) in self.levels.iter().zip(&self.counts) {
            let mark = if self.dropped_levels.contains(n) {
                "  (dropped)"
            } else {
                ""
            };
            s.push_str(&format!("{n:>5}  {c}{mark}\n"));
        }
        s.push_str(&format!(
            "box slope over levels {}..{} = {:.4} +- {:.4}\n",
            self.fit_lo, self.fit_hi, self.slope, self.stderr
        ));
        if let (Some(a), Some(se)) = (self.alpha, self.alpha_stderr) {
            s.push_str(&format!(
                "entropy alpha = {a:.4} +- {se:.4} over levels {:?}\n",
                self.alpha_levels.unwrap_or((0, 0))
            ));
        }
        if let Some(ly) = self.ly_dim {
            s.push_str(&format!("ledrappier-young consistency = {ly:.4}\n"));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }

    /// CSV of `(n, N_n)` for external plotting.
    pub fn counts_csv(&self) -> String {
        let mut s = String::from("n,count\n");
        for (n, c) in self.levels.iter().zip(&self.counts) {
            s.push_str(&format!("{n},{c}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run the full pipeline: degeneracy index, predicted dimension, box counts
/// with stability screening, slope regression, and (optionally) the
/// entropy-dimension consistency section.
pub fn full_report(
    p: &Params,
    k: &KernelFunction,
    opts: &ReportOptions,
) -> Result<DimensionReport, BoxdimError> {
    if opts.levels.len() < 3 {
        return Err(BoxdimError::BadArg("need at least three levels".into()));
    }
    let mut levels = opts.levels.clone();
    levels.sort_unstable();
    levels.dedup();

    let tb = TruncationBudget::for_kernel(p, k, opts.tol)?;
    let rep = compute_q(p, k, opts.rank_tol, opts.m_stable)?;
    let (predicted, branch) = predicted_dimension(p, k.d(), rep.q_prime);

    let mut warnings = Vec::new();
    if rep.m_capped {
        warnings.push(format!(
            "kernel stabilization hit the column cap at m={}",
            rep.m_used
        ));
    }

    let mut counts = Vec::with_capacity(levels.len());
    let mut dropped = Vec::new();
    for &n in &levels {
        let c = box_count(p, k, n, opts.oversample, &tb)?;
        if opts.stability_check {
            let c2 = box_count(p, k, n, opts.oversample * 2, &tb)?;
            let rel = (c2 as f64 - c as f64).abs() / c.max(1) as f64;
            if rel >= 0.02 {
                dropped.push(n);
                warnings.push(format!(
                    "level {n} unstable under oversampling (count moved {:.1}%)",
                    100.0 * rel
                ));
            }
        }
        counts.push(c);
    }
    // If instability would leave no usable fit, keep the levels (flagged) so
    // the report still carries a slope; the warnings record the caveat.
    if levels.len() - dropped.len() < 3 {
        warnings.push("too few stable levels; fitting over flagged levels".into());
        dropped.clear();
    }

    // Count monotonicity and the branching bound, per run.
    for i in 1..levels.len() {
        if levels[i] == levels[i - 1] + 1 {
            if counts[i] < counts[i - 1] {
                warnings.push(format!(
                    "count decreased from level {} to {}",
                    levels[i - 1],
                    levels[i]
                ));
            }
            let cap = counts[i - 1] as f64 * p.b_f().powi(1 + k.d() as i32);
            if counts[i] as f64 > cap {
                warnings.push(format!(
                    "count at level {} exceeds the branching bound",
                    levels[i]
                ));
            }
        }
    }

    let (fit_lo, fit_hi) = match opts.fit_levels {
        Some(r) => r,
        None => {
            // Drop the two coarsest levels: transient regime.
            let usable: Vec<u32> = levels
                .iter()
                .skip(2)
                .filter(|n| !dropped.contains(n))
                .cloned()
                .collect();
            if usable.len() < 3 {
                return Err(BoxdimError::FitRange(
                    "fewer than three stable levels after dropping the transient".into(),
                ));
            }
            (usable[0], *usable.last().unwrap())
        }
    };
    let fit_counts: Vec<(u32, u64)> = levels
        .iter()
        .zip(&counts)
        .filter(|(n, _)| !dropped.contains(n))
        .map(|(&n, &c)| (n, c))
        .collect();
    let fit = estimate_box_dimension(p.b(), &fit_counts, (fit_lo, fit_hi))?;

    let mut alpha = None;
    let mut alpha_stderr = None;
    let mut alpha_levels = None;
    let mut ly_dim = None;
    if let Some(eopts) = &opts.entropy {
        let stream = random_stream(p, opts.seed, eopts.stream_cycle);
        let measure = sample_flow_projection(p, k, &stream, eopts.samples, &tb, opts.seed)?;
        let (n0, n1) = match eopts.levels {
            Some(r) => r,
            None => {
                // Deepest level safely clear of undersampling.
                let mut n1 = 2;
                while n1 < 24
                    && measure.occupied_cells(n1 + 1) < (eopts.samples as u64 / 50).max(2)
                {
                    n1 += 1;
                }
                (2, n1.max(4))
            }
        };
        let slope = measure.entropy_dimension(n0, n1);
        if !slope.undersampled.is_empty() {
            warnings.push(format!(
                "entropy levels {:?} undersampled",
                slope.undersampled
            ));
        }
        alpha = Some(slope.slope);
        alpha_stderr = Some(slope.stderr);
        alpha_levels = Some((n0, n1));
        ly_dim = Some(1.0 + (1.0 + p.log_b_lambda()) * slope.slope);
    }

    Ok(DimensionReport {
        b: p.b(),
        lambda: p.lambda(),
        d: k.d(),
        q: rep.q_prime,
        sigma_gap: rep.sigma_gap,
        m_used: rep.m_used,
        predicted,
        branch: branch.to_string(),
        levels,
        counts,
        fit_lo,
        fit_hi,
        dropped_levels: dropped,
        slope: fit.slope,
        stderr: fit.stderr,
        alpha,
        alpha_stderr,
        alpha_levels,
        ly_dim,
        warnings,
        oversample: opts.oversample,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn telescoping_kernel_reports_a_smooth_curve() {
        let p = Params::new(2, 0.7).unwrap();
        let k = KernelFunction::telescoped(&KernelFunction::cosine(), 2, 0.7);
        let opts = ReportOptions {
            levels: (1..=8).collect(),
            ..Default::default()
        };
        let rep = full_report(&p, &k, &opts).unwrap();
        assert_eq!(rep.q, 1);
        assert_eq!(rep.predicted, 1.0);
        assert!(
            (rep.slope - 1.0).abs() <= 0.1,
            "slope {} not near 1",
            rep.slope
        );
    }

    #[test]
    fn report_serialization_has_the_fixed_fields() {
        let p = Params::new(3, 0.5).unwrap();
        let k = KernelFunction::cosine();
        let opts = ReportOptions {
            levels: (1..=6).collect(),
            stability_check: false,
            ..Default::default()
        };
        let rep = full_report(&p, &k, &opts).unwrap();
        let json = rep.to_json();
        for field in [
            "\"predicted\"",
            "\"branch\"",
            "\"q\"",
            "\"levels\"",
            "\"counts\"",
            "\"slope\"",
            "\"stderr\"",
            "\"alpha\"",
            "\"ly_dim\"",
        ] {
            assert!(json.contains(field), "missing {field} in {json}");
        }
        let csv = rep.counts_csv();
        assert!(csv.starts_with("n,count\n"));
        assert_eq!(csv.lines().count(), 1 + rep.levels.len());
    }

    #[test]
    fn explicit_fit_range_is_respected() {
        let p = Params::new(2, 0.7).unwrap();
        let k = KernelFunction::cosine();
        let opts = ReportOptions {
            levels: (1..=7).collect(),
            fit_levels: Some((3, 7)),
            stability_check: false,
            ..Default::default()
        };
        let rep = full_report(&p, &k, &opts).unwrap();
        assert_eq!((rep.fit_lo, rep.fit_hi), (3, 7));
    }
}
