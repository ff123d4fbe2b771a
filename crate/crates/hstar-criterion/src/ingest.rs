//! Kernel ingestion from uniform samples via the DFT, for kernels that are
//! not given as explicit trigonometric polynomials.

use num_complex::Complex64;
use rustfft::FftPlanner;
use weier_core::KernelFunction;

use crate::CriterionError;

/// Build a kernel from `2^K` uniform samples per coordinate (one vector per
/// coordinate, sampled at `x = i / N` for `i = 0..N`).
///
/// Coefficients are taken from the DFT up to (and excluding) the Nyquist
/// frequency. `deriv3_bound` is a caller-supplied bound on `||phi'''||_inf`;
/// it yields the decay model `|a_m| <= deriv3_bound / (2 pi m)^3` used to
/// bound both the aliasing error of each retained coefficient and the series
/// tails beyond the stored support.
pub fn ingest_sampled(
    samples: &[Vec<f64>],
    deriv3_bound: f64,
) -> Result<KernelFunction, CriterionError> {
    let d = samples.len();
    if d == 0 {
        return Err(CriterionError::BadSamples("no coordinates given".into()));
    }
    let n = samples[0].len();
    if samples.iter().any(|s| s.len() != n) {
        return Err(CriterionError::BadSamples(
            "all coordinates must have the same sample count".into(),
        ));
    }
    if n < 64 || !n.is_power_of_two() {
        return Err(CriterionError::BadSamples(format!(
            "sample count {n} must be a power of two >= 64"
        )));
    }
    if !(deriv3_bound >= 0.0 && deriv3_bound.is_finite()) {
        return Err(CriterionError::BadSamples(
            "deriv3_bound must be a finite nonnegative number".into(),
        ));
    }

    let scale = samples
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let noise = 1e-12 * scale;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut spectra: Vec<Vec<(i64, Complex64)>> = Vec::with_capacity(d);
    for coord in samples {
        let mut buf: Vec<Complex64> = coord.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.process(&mut buf);
        let mut spec = Vec::new();
        // m = 0 then +-m up to (exclusive) Nyquist n/2.
        let a0 = buf[0] / n as f64;
        if a0.norm() > noise {
            spec.push((0i64, Complex64::new(a0.re, 0.0)));
        }
        for m in 1..n / 2 {
            let pos = buf[m] / n as f64;
            let neg = buf[n - m] / n as f64;
            if pos.norm() > noise || neg.norm() > noise {
                spec.push((m as i64, pos));
                spec.push((-(m as i64), neg));
            }
        }
        spectra.push(spec);
    }
    let kernel = KernelFunction::from_symmetric_spectrum(d, &spectra)?;

    // Aliasing of a retained coefficient: sum over the reflected images
    // |a_{m + r n}|, bounded by ~10 / n^3 times the decay constant.
    let alias = deriv3_bound / std::f64::consts::TAU.powi(3) * 10.0 / (n as f64).powi(3);
    Ok(kernel.with_decay_bound(deriv3_bound, alias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn sample(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / n as f64)).collect()
    }

    #[test]
    fn pure_tone_recovers_its_coefficient() {
        let n = 256;
        let k = ingest_sampled(&[sample(|x| (TAU * x).cos(), n)], TAU.powi(3)).unwrap();
        assert!((k.coeff(0, 1) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        for m in 2..20 {
            assert!(k.coeff(0, m).norm() < 1e-12, "m={m}");
        }
        assert!(k.decay3().is_some());
    }

    #[test]
    fn constant_samples_keep_only_the_mean() {
        let k = ingest_sampled(&[vec![0.75; 128]], 0.0).unwrap();
        assert_eq!(k.a0()[0], 0.75);
        assert!(k.is_constant());
    }

    #[test]
    fn two_tone_spectrum() {
        let n = 512;
        let k = ingest_sampled(
            &[sample(|x| (TAU * x).cos() + 0.25 * (3.0 * TAU * x).cos(), n)],
            200.0,
        )
        .unwrap();
        assert!((k.coeff(0, 1) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((k.coeff(0, 3) - Complex64::new(0.125, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_sample_counts() {
        assert!(ingest_sampled(&[vec![0.0; 100]], 1.0).is_err());
        assert!(ingest_sampled(&[vec![0.0; 32]], 1.0).is_err());
        assert!(ingest_sampled(&[vec![0.0; 128], vec![0.0; 64]], 1.0).is_err());
    }
}
