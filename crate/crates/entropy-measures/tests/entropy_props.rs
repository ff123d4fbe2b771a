//! Entropy identities and inequalities on the measure corpus: bounds,
//! refinement monotonicity, concavity/convexity, commensurability under
//! frame rotation, the decomposition contract, and the first-level
//! self-affinity of the flow projections.

use entropy_measures::{
    sample_flow_projection, sample_mu, EmpiricalMeasure, LevelEntropy, ProductMeasure,
};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use weier_core::{flow_projection, g_apply, KernelFunction, Params, TruncationBudget, Word};

fn random_cloud(rng: &mut ChaCha8Rng, dim: usize, points: usize) -> EmpiricalMeasure {
    let coords: Vec<f64> = (0..points * dim)
        .map(|_| rng.random_range(0.0..2.0))
        .collect();
    let weights: Vec<f64> = (0..points).map(|_| rng.random_range(0.1..1.0)).collect();
    EmpiricalMeasure::from_flat(2, dim, coords, weights).unwrap()
}

fn corpus() -> Vec<EmpiricalMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    vec![
        EmpiricalMeasure::point_mass(2, vec![0.4, 0.9]),
        EmpiricalMeasure::uniform_grid(2, 4, 2),
        EmpiricalMeasure::bernoulli_dyadic(0.3, 10)
            .project(&[vec![1.0]])
            .unwrap(),
        random_cloud(&mut rng, 2, 500),
        random_cloud(&mut rng, 3, 200),
    ]
}

#[test]
fn entropy_bounds_and_refinement_monotonicity() {
    for m in corpus() {
        let dim = m.ambient_dim() as f64;
        let mut prev = 0.0f64;
        for n in 0..=9u32 {
            let h = m.level_entropy(n);
            let occupied = m.occupied_cells(n) as f64;
            assert!(h >= -1e-12, "negative entropy {h}");
            assert!(
                h <= occupied.log2() + 1e-9,
                "H = {h} exceeds log2 of {occupied} occupied cells"
            );
            if n > 0 {
                assert!(h >= prev - 1e-10, "refinement lost entropy at n={n}");
                assert!(
                    h - prev <= dim + 1e-9,
                    "level {n} added {} > dim {dim}",
                    h - prev
                );
            }
            prev = h;
        }
    }
}

#[test]
fn concavity_and_convexity_of_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let log2_2 = 1.0; // log_b 2 with b = 2
    for _ in 0..20 {
        let a = random_cloud(&mut rng, 2, 300);
        let b = random_cloud(&mut rng, 2, 300);
        for &t in &[0.25, 0.5, 0.75] {
            let mix = EmpiricalMeasure::mixture(&a, &b, t).unwrap();
            for n in 1..=8u32 {
                let ha = a.level_entropy(n);
                let hb = b.level_entropy(n);
                let hm = mix.level_entropy(n);
                assert!(
                    t * ha + (1.0 - t) * hb <= hm + 1e-9,
                    "concavity failed: t={t} n={n}"
                );
                assert!(
                    hm <= log2_2 + t * ha + (1.0 - t) * hb + 1e-9,
                    "convexity failed: t={t} n={n}"
                );
            }
        }
    }
}

#[test]
fn conditional_entropy_routes_agree_on_the_corpus() {
    for m in corpus() {
        for (fine, coarse) in [(5u32, 2u32), (7, 4)] {
            let direct = m.conditional_entropy_direct(fine, coarse);
            let diff = m.conditional_entropy(fine, coarse);
            assert!(
                (direct - diff).abs() <= 1e-10,
                "routes disagree: {direct} vs {diff}"
            );
        }
    }
}

#[test]
fn rotated_frames_are_commensurable() {
    // H(omega, L_m^V or L_m^{V-perp} joint) is the entropy of the rotated
    // measure; it stays within the ambient dimension of the axis-aligned
    // entropy on this corpus.
    let m = EmpiricalMeasure::uniform_grid(2, 5, 2);
    for theta in [0.2f64, 0.7, 1.2] {
        let (s, c) = theta.sin_cos();
        let rot = m.project(&[vec![c, -s], vec![s, c]]).unwrap();
        for level in 1..=5u32 {
            let diff = (rot.level_entropy(level) - m.level_entropy(level)).abs();
            assert!(diff <= 2.0, "theta={theta} level={level}: diff {diff}");
        }
    }
}

#[test]
fn decomposition_residual_respects_the_contract() {
    // Contract: residual <= k (2m + log_b(2R + 2) + 1) / n.
    let cases: Vec<(EmpiricalMeasure, u32, u32)> = vec![
        (EmpiricalMeasure::uniform_grid(2, 8, 1), 8, 2),
        (EmpiricalMeasure::bernoulli_dyadic(0.3, 12), 10, 3),
        (EmpiricalMeasure::uniform_grid(2, 4, 2), 6, 2),
    ];
    for (m, n, mm) in cases {
        let k = m.ambient_dim() as f64;
        let bound = k * (2.0 * mm as f64 + (2.0 * m.radius() + 2.0).log2() + 1.0) / n as f64;
        let r = m.decomposition_residual(n, mm);
        assert!(r <= bound, "residual {r} > bound {bound}");
    }
    // Product measures satisfy the identity to rounding.
    assert!(ProductMeasure::bernoulli(0.3).unwrap().decomposition_residual(24, 4) <= 1e-10);
    assert!(ProductMeasure::uniform(2, 2).decomposition_residual(24, 4) <= 1e-10);
}

#[test]
fn flow_projection_measure_is_first_level_self_affine() {
    // pi_j mu = (1/b) sum_i pi_j g_i mu: reassembling the projection from
    // the first-level pieces must reproduce its entropy profile.
    let p = Params::new(2, 0.8).unwrap();
    let k = KernelFunction::complex_exp();
    let tb = TruncationBudget::for_kernel(&p, &k, 1e-10).unwrap();
    let j = entropy_measures::random_stream(&p, 5, 64);
    let m_samples = 1_000_000;

    let direct = sample_flow_projection(&p, &k, &j, m_samples, &tb, 5).unwrap();

    let mu = sample_mu(&p, &k, m_samples, &tb, 5).unwrap();
    let mut coords = Vec::with_capacity(2 * m_samples * k.d());
    for digit in 0..p.b() {
        let w = Word::new(vec![digit], p.b()).unwrap();
        for i in 0..mu.len() {
            let pt = mu.point(i);
            let (gx, gy) = g_apply(&p, &k, &w, pt[0], &pt[1..]);
            coords.extend(flow_projection(&p, &k, &j, gx, &gy, &tb));
        }
    }
    let assembled = EmpiricalMeasure::from_flat(
        p.b(),
        k.d(),
        coords,
        vec![1.0; p.b() as usize * m_samples],
    )
    .unwrap();

    let h_direct = direct.level_entropy(6);
    let h_assembled = assembled.level_entropy(6);
    assert!(
        (h_direct - h_assembled).abs() <= 0.05,
        "level-6 entropies {h_direct} vs {h_assembled}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measure_dump_round_trips(
        points in proptest::collection::vec(
            (proptest::collection::vec(-100.0f64..100.0, 2), 1e-6f64..1.0),
            1..40,
        )
    ) {
        let m = EmpiricalMeasure::new(2, 2, points).unwrap();
        let back = EmpiricalMeasure::restore_csv(2, &m.dump_csv()).unwrap();
        prop_assert_eq!(m, back);
    }

    #[test]
    fn entropy_stays_within_bounds_on_random_measures(
        points in proptest::collection::vec(
            (proptest::collection::vec(0.0f64..4.0, 1), 1e-6f64..1.0),
            1..60,
        ),
        n in 0u32..10,
    ) {
        let m = EmpiricalMeasure::new(2, 1, points).unwrap();
        let h = m.level_entropy(n);
        prop_assert!(h >= -1e-12);
        prop_assert!(h <= (m.occupied_cells(n) as f64).log2() + 1e-9);
    }
}
