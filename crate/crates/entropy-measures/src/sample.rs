//! Samplers for the graph measure `mu` (the lift of Lebesgue measure to the
//! graph of `W`) and its flow projections `pi_j mu`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use weier_core::{Evaluator, KernelFunction, Params, SymbolStream, TruncationBudget, Word};

use crate::measure::EmpiricalMeasure;
use crate::MeasureError;

/// Stratified x-draws: one uniform point in each interval `[i/m, (i+1)/m)`.
fn stratified_xs(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|i| (i as f64 + rng.random::<f64>()) / m as f64)
        .collect()
}

/// Sample `mu`: `m_samples` weighted points `(x_i, W(x_i))` in `R^(1+d)`.
pub fn sample_mu(
    p: &Params,
    k: &KernelFunction,
    m_samples: usize,
    tb: &TruncationBudget,
    seed: u64,
) -> Result<EmpiricalMeasure, MeasureError> {
    if m_samples == 0 {
        return Err(MeasureError::BadArg("need at least one sample".into()));
    }
    let xs = stratified_xs(m_samples, seed);
    let dim = 1 + k.d();
    let ev = Evaluator::new(p, k, tb);
    let coords: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|&x| {
            let mut row = Vec::with_capacity(dim);
            row.push(x);
            row.extend(ev.w(x));
            row
        })
        .collect();
    EmpiricalMeasure::from_flat(p.b(), dim, coords, vec![1.0; m_samples])
}

/// Sample the flow projection `pi_j mu`: points `W(x_i) - Gamma_j(x_i)` in
/// `R^d`.
pub fn sample_flow_projection(
    p: &Params,
    k: &KernelFunction,
    j: &SymbolStream,
    m_samples: usize,
    tb: &TruncationBudget,
    seed: u64,
) -> Result<EmpiricalMeasure, MeasureError> {
    if m_samples == 0 {
        return Err(MeasureError::BadArg("need at least one sample".into()));
    }
    let xs = stratified_xs(m_samples, seed);
    let d = k.d();
    let ev = Evaluator::new(p, k, tb);
    let coords: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|&x| {
            let w = ev.w(x);
            let g = ev.gamma(x, j);
            w.into_iter().zip(g).map(|(wi, gi)| wi - gi).collect::<Vec<f64>>()
        })
        .collect();
    EmpiricalMeasure::from_flat(p.b(), d, coords, vec![1.0; m_samples])
}

/// A reproducible pseudo-random stream: a cycle of `cycle_len` digits drawn
/// from the seeded generator.
pub fn random_stream(p: &Params, seed: u64, cycle_len: usize) -> SymbolStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5745_4945_5253_5452);
    let digits: Vec<u32> = (0..cycle_len.max(1))
        .map(|_| rng.random_range(0..p.b()))
        .collect();
    SymbolStream::new(
        Word::empty(),
        Word::new(digits, p.b()).expect("digits drawn in range"),
    )
    .expect("nonempty cycle")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::LevelEntropy;

    #[test]
    fn zero_kernel_samples_lie_on_the_axis() {
        let p = Params::new(2, 0.7).unwrap();
        let k = KernelFunction::zero(1);
        let tb = TruncationBudget::for_kernel(&p, &k, 1e-10).unwrap();
        let mu = sample_mu(&p, &k, 100, &tb, 1).unwrap();
        assert_eq!(mu.dim(), 2);
        for i in 0..mu.len() {
            assert_eq!(mu.point(i)[1], 0.0);
        }
        let proj = sample_flow_projection(
            &p,
            &k,
            &SymbolStream::constant(0, 2).unwrap(),
            50,
            &tb,
            1,
        )
        .unwrap();
        for i in 0..proj.len() {
            assert_eq!(proj.point(i)[0], 0.0);
        }
    }

    #[test]
    fn single_sample_is_a_point_mass() {
        let p = Params::new(2, 0.7).unwrap();
        let k = KernelFunction::cosine();
        let tb = TruncationBudget::for_kernel(&p, &k, 1e-10).unwrap();
        let mu = sample_mu(&p, &k, 1, &tb, 9).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.weight(0), 1.0);
        assert_eq!(mu.level_entropy(10), 0.0);
    }

    #[test]
    fn graph_samples_respect_the_geometric_bound() {
        // b=3, lambda=0.5, cos kernel: |W| <= ||phi|| / (1 - lambda) = 2.
        let p = Params::new(3, 0.5).unwrap();
        let k = KernelFunction::cosine();
        let tb = TruncationBudget::for_kernel(&p, &k, 1e-10).unwrap();
        let mu = sample_mu(&p, &k, 2000, &tb, 3).unwrap();
        for i in 0..mu.len() {
            assert!(mu.point(i)[1].abs() <= 2.0 + 1e-9);
        }
        assert!(mu.radius() <= (1.0f64 + 4.0).sqrt());
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let p = Params::new(2, 0.8).unwrap();
        let k = KernelFunction::complex_exp();
        let tb = TruncationBudget::for_kernel(&p, &k, 1e-10).unwrap();
        let a = sample_mu(&p, &k, 500, &tb, 42).unwrap();
        let b = sample_mu(&p, &k, 500, &tb, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_mu(&p, &k, 500, &tb, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_streams_are_reproducible() {
        let p = Params::new(3, 0.6).unwrap();
        let a = random_stream(&p, 7, 64);
        let b = random_stream(&p, 7, 64);
        assert_eq!(a, b);
        for i in 0..200 {
            assert!(a.digit(i) < 3);
        }
    }
}
