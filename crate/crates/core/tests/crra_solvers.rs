use hcran::channel::draw_channel;
use hcran::crra::brute_force_oracle;
use hcran::crra::{solve_waterfill, WaterfillProblem};
use hcran::crra::{check_feasibility, solve, CrraProblem};
use hcran::{RngStream, Scheme, SystemConfig};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(scheme: Scheme, rng: &mut ChaCha8Rng, seed: u64) -> Option<CrraProblem> {
    let mut cfg = SystemConfig::new(4, 2, 1, 1.0, 1.0).unwrap();
    cfg.p_ms = 10f64.powf(rng.random_range(0.5..3.0));
    cfg.p_rs_i = (0..2).map(|_| rng.random_range(0.1..5.0)).collect();
    cfg.p_rs = rng.random_range(0.2..8.0);
    cfg.r_ms = rng.random_range(0.2..4.0);
    let chan = draw_channel(&cfg, &mut RngStream::new(seed, 0));
    let prob = CrraProblem::new(cfg, chan, scheme).ok()?;
    check_feasibility(&prob).then_some(prob)
}

fn compare_with_grid(scheme: Scheme, instances: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut draw = 0;
    while done < instances {
        draw += 1;
        let Some(prob) = random_problem(scheme, &mut rng, seed * 1000 + draw) else { continue };
        let sol = solve(&prob).unwrap();
        let grid = brute_force_oracle(&prob, 41).unwrap();
        assert!(
            sol.rue_sum_rate >= grid.rue_sum_rate - 1e-3,
            "{scheme} instance {draw}: solver {} < grid {}",
            sol.rue_sum_rate,
            grid.rue_sum_rate
        );
        let cfg = &prob.cfg;
        assert!(sol.p_r.iter().zip(&cfg.p_rs_i).all(|(p, c)| *p >= 0.0 && *p <= c * (1.0 + 1e-12)));
        assert!(sol.p_r.iter().sum::<f64>() <= cfg.p_rs * (1.0 + 1e-12));
        assert!(sol.p_m <= cfg.p_ms * (1.0 + 1e-12));
        assert!(prob.mue_violation(sol.p_m, &sol.p_r) <= 1e-9, "{scheme} instance {draw}: MUE floor violated");
        if scheme == Scheme::Ic {
            assert!(sol.kkt_residual <= 1e-6, "instance {draw}: kkt {}", sol.kkt_residual);
        }
        done += 1;
    }
}

#[test]
fn ic_solver_matches_grid_search() {
    compare_with_grid(Scheme::Ic, 100, 1);
}

#[test]
fn bf_solver_matches_grid_search() {
    compare_with_grid(Scheme::Bf, 100, 2);
}

/// Classic single-budget water-filling by bisection on the water level.
fn bisection_waterfill(gains: &[f64], budget: f64) -> Vec<f64> {
    let alloc = |level: f64| gains.iter().map(|g| (level - 1.0 / g).max(0.0)).collect::<Vec<_>>();
    let (mut lo, mut hi) = (0.0, budget + gains.iter().map(|g| 1.0 / g).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alloc(mid).iter().sum::<f64>() > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    alloc(lo)
}

proptest! {
    #[test]
    fn budget_only_matches_bisection(gains in prop::collection::vec(0.01f64..100.0, 1..6), budget in 0.01f64..20.0) {
        let n = gains.len();
        let prob = WaterfillProblem { gains: gains.clone(), caps: vec![budget; n], budget, coupling: vec![], rhs: vec![] };
        let sol = solve_waterfill(&prob).unwrap();
        let want = bisection_waterfill(&gains, budget);
        for (p, w) in sol.p.iter().zip(&want) {
            prop_assert!((p - w).abs() <= 1e-7 * (1.0 + budget), "{:?} vs {:?}", sol.p, want);
        }
    }

    #[test]
    fn objective_grows_with_budget(gains in prop::collection::vec(0.01f64..100.0, 1..5),
                                   caps in prop::collection::vec(0.1f64..10.0, 5),
                                   budget in 0.01f64..10.0, extra in 0.0f64..5.0) {
        let n = gains.len();
        let mk = |b| WaterfillProblem { gains: gains.clone(), caps: caps[..n].to_vec(), budget: b, coupling: vec![], rhs: vec![] };
        let small = solve_waterfill(&mk(budget)).unwrap().objective_bits;
        let large = solve_waterfill(&mk(budget + extra)).unwrap().objective_bits;
        prop_assert!(large >= small - 1e-9);
    }

    #[test]
    fn power_scale_invariance(gains in prop::collection::vec(0.01f64..50.0, 2..5),
                              load in prop::collection::vec(0.01f64..3.0, 5),
                              budget in 0.1f64..10.0, rhs in 0.05f64..5.0, c in 0.01f64..100.0) {
        // scaling every power by c and every gain by 1/c leaves the problem unchanged
        let n = gains.len();
        let base = WaterfillProblem {
            gains: gains.clone(),
            caps: vec![budget; n],
            budget,
            coupling: vec![load[..n].to_vec()],
            rhs: vec![rhs],
        };
        let scaled = WaterfillProblem {
            gains: gains.iter().map(|g| g / c).collect(),
            caps: vec![budget * c; n],
            budget: budget * c,
            coupling: base.coupling.clone(),
            rhs: vec![rhs * c],
        };
        let a = solve_waterfill(&base).unwrap();
        let b = solve_waterfill(&scaled).unwrap();
        prop_assert!((a.objective_bits - b.objective_bits).abs() <= 1e-7 * (1.0 + a.objective_bits));
        for (p, q) in a.p.iter().zip(&b.p) {
            prop_assert!((p * c - q).abs() <= 1e-6 * c * (1.0 + budget));
        }
    }
}
