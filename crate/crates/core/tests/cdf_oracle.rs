mod common;

use common::{exp_sinh, mixed_ratio_survival_sum, ratio_survival_quad};
use hcran::analytic::{cdf_lemma1, cdf_lemma2_approx, cdf_lemma2_exact, mixed_gamma_density, CdfParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

fn grid_z() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 9.0)).collect()
}

#[test]
fn single_interferer_cdf_matches_quadrature_grid() {
    let params = [
        (0.1, 0.0, 4, 2),
        (1.0, 0.0, 1, 1),
        (2.0, 0.5, 3, 2),
        (0.5, 2.0, 6, 3),
        (10.0, 0.1, 2, 5),
        (0.3, 1.0, 8, 1),
        (1.0, 1.0, 5, 4),
        (5.0, 3.0, 3, 3),
        (0.05, 0.05, 7, 2),
        (3.0, 0.0, 10, 6),
    ];
    let mut worst: f64 = 0.0;
    for &(a, b, l, m) in &params {
        let p = CdfParams::new(a, b, l, m).unwrap();
        for z in grid_z() {
            let got = cdf_lemma1(z, &p).unwrap();
            let want = 1.0 - ratio_survival_quad(z, a, b, l, m);
            worst = worst.max((got - want).abs());
            assert!((got - want).abs() <= 1e-8, "a={a} b={b} l={l} m={m} z={z}: {got} vs {want}");
        }
    }
    assert!(worst.is_finite());
}

#[test]
fn two_interferer_cdf_matches_finite_sum() {
    for &(a, b, l, m, n) in &[(0.1, 1.0, 6, 2, 1), (2.0, 0.5, 4, 3, 2), (1.0, 3.0, 8, 5, 3), (0.5, 0.2, 3, 1, 4)] {
        let p = CdfParams::with_n(a, b, l, m, n).unwrap();
        for z in grid_z() {
            let got = cdf_lemma2_exact(z, &p).unwrap();
            let want = 1.0 - mixed_ratio_survival_sum(z, a, b, l, m, n);
            assert!((got - want).abs() <= 1e-8, "{p:?} z={z}: {got} vs {want}");
        }
    }
}

#[test]
fn two_interferer_cdf_matches_sampling() {
    // X ~ Gamma(6), Y1 ~ Gamma(3), Y2 ~ Gamma(1); a = 0.5, b = 1
    let (a, b, l, m, n) = (0.5, 1.0, 6u32, 3u32, 1u32);
    let p = CdfParams::with_n(a, b, l, m, n).unwrap();
    let gx = Gamma::new(l as f64, 1.0).unwrap();
    let g1 = Gamma::new(m as f64, 1.0).unwrap();
    let g2 = Gamma::new(n as f64, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples = 200_000;
    let zs: Vec<f64> = (0..samples).map(|_| gx.sample(&mut rng) / (a * g1.sample(&mut rng) + b * g2.sample(&mut rng))).collect();
    for z in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let hits = zs.iter().filter(|v| **v <= z).count() as f64 / samples as f64;
        let cdf = cdf_lemma2_exact(z, &p).unwrap();
        let se = (cdf * (1.0 - cdf) / samples as f64).sqrt();
        assert!((hits - cdf).abs() <= 4.0 * se, "z={z}: empirical {hits} vs {cdf} (se {se})");
    }
}

#[test]
fn mixed_density_is_normalised() {
    for &(a, b, m, n) in &[(1.0, 2.0, 1, 1), (0.3, 4.0, 3, 2), (5.0, 0.5, 2, 6)] {
        let mass = exp_sinh(|y| mixed_gamma_density(y, a, b, m, n), 0.0, 1e-13);
        assert!((mass - 1.0).abs() < 1e-10, "a={a} b={b}: {mass}");
        let mean = exp_sinh(|y| y * mixed_gamma_density(y, a, b, m, n), 0.0, 1e-13);
        assert!((mean - (a * m as f64 + b * n as f64)).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn single_interferer_cdf_is_monotone(a in 0.01f64..20.0, b in 0.0f64..5.0, l in 1u32..12, m in 1u32..8,
                                         z in 0.0f64..50.0, dz in 0.0f64..10.0) {
        let p = CdfParams::new(a, b, l, m).unwrap();
        let lo = cdf_lemma1(z, &p).unwrap();
        let hi = cdf_lemma1(z + dz, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi >= lo - 1e-14);
    }

    #[test]
    fn two_interferer_cdf_is_monotone(a in 0.05f64..5.0, b in 0.05f64..5.0, l in 1u32..8, m in 1u32..4,
                                      n in 1u32..4, z in 0.01f64..20.0, dz in 0.0f64..5.0) {
        let p = CdfParams::with_n(a, b, l, m, n).unwrap();
        let lo = cdf_lemma2_exact(z, &p).unwrap();
        let hi = cdf_lemma2_exact(z + dz, &p).unwrap();
        prop_assert!(hi >= lo - 1e-9);
    }

    #[test]
    fn approximation_is_the_mean_substituted_single_interferer(a in 0.05f64..5.0, b in 0.0f64..5.0,
                                                               l in 1u32..8, m in 1u32..4, n in 1u32..4, z in 0.0f64..20.0) {
        let p = CdfParams::with_n(a, b, l, m, n).unwrap();
        let approx = cdf_lemma2_approx(z, &p).unwrap();
        prop_assert!(approx.approximate);
        let direct = cdf_lemma1(z, &CdfParams::new(a, b * n as f64, l, m).unwrap()).unwrap();
        prop_assert_eq!(approx.value, direct);
    }
}
