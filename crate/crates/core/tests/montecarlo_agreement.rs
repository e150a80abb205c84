use hcran::analytic::{self, AnalyticOptions};
use hcran::montecarlo::{ks_statistic, sample_link_sinrs, simulate, McOptions, TrialPlan};
use hcran::{channel, Link, RngStream, Scheme, SystemConfig};

const OPTS: AnalyticOptions = AnalyticOptions { exact_bf_cdf: false, as_printed: false };

fn check(scheme: Scheme, cfg: &SystemConfig, trials: u64, seed: u64) {
    let sim = simulate(scheme, cfg, &TrialPlan::new(trials, seed), &McOptions::default()).unwrap();
    let outage = analytic::outage_overall(scheme, cfg, &OPTS).unwrap();
    let ber = analytic::average_ber(scheme, cfg, &OPTS).unwrap();
    assert!(sim.outage().agrees(outage, 3.0), "{scheme} outage: mc {:?} vs {outage}", sim.outage());
    assert!(sim.ber().agrees(ber, 3.0), "{scheme} ber: mc {:?} vs {ber}", sim.ber());
    for link in [Link::Mue, Link::Rue] {
        let cap = analytic::link_capacity(scheme, link, cfg, &OPTS).unwrap();
        let est = sim.link_capacity(link);
        assert!(est.agrees(cap, 3.0), "{scheme} {link:?} capacity: mc {est:?} vs {cap}");
        let cdf = analytic::cdf_sinr(scheme, link, cfg.gamma_th, cfg, &OPTS).unwrap();
        assert!(sim.link_cdf(link).agrees(cdf, 3.0), "{scheme} {link:?} cdf");
    }
}

#[test]
fn ic_matches_analysis() {
    let cfg = SystemConfig::new(6, 2, 2, 4.0, 1.0).unwrap().with_gamma_th(1.0);
    check(Scheme::Ic, &cfg, 100_000, 11);
}

#[test]
fn bf_single_mue_matches_analysis() {
    let cfg = SystemConfig::new(5, 3, 1, 2.0, 2.0).unwrap().with_gamma_th(0.5);
    check(Scheme::Bf, &cfg, 100_000, 12);
}

#[test]
fn sampled_sinrs_pass_ks_against_closed_form() {
    let cfg = SystemConfig::new(6, 3, 1, 1.0, 0.5).unwrap();
    let plan = TrialPlan::new(20_000, 5);
    for (scheme, link) in [(Scheme::Ic, Link::Mue), (Scheme::Ic, Link::Rue), (Scheme::Bf, Link::Mue), (Scheme::Bf, Link::Rue)] {
        let samples = sample_link_sinrs(scheme, link, &cfg, &plan, &McOptions::default()).unwrap();
        let d = ks_statistic(&samples, |z| analytic::cdf_sinr(scheme, link, z, &cfg, &OPTS).unwrap());
        // RUE samples of one trial share the MBS draw, so use the trial
        // count for a conservative critical value at the 0.1% level
        let crit = 1.95 / (plan.trials as f64).sqrt();
        assert!(d < crit, "{scheme} {link:?}: D = {d} >= {crit}");
    }
}

fn mean_power(m: &hcran::linalg::CMatrix) -> f64 {
    let total: f64 = (0..m.rows()).flat_map(|i| m.row(i).iter()).map(|c| c.norm_sqr()).sum();
    total / (m.rows() * m.cols()) as f64
}

#[test]
fn channel_entries_have_unit_power() {
    let cfg = SystemConfig::new(8, 2, 2, 1.0, 1.0).unwrap();
    let draws = 20_000;
    let mut acc = [0.0; 4];
    for t in 0..draws {
        let ch = channel::draw_channel(&cfg, &mut RngStream::new(3, t));
        acc[0] += mean_power(&ch.h_mm);
        acc[1] += mean_power(&ch.h_rm);
        acc[2] += mean_power(&ch.g_mr);
        acc[3] += ch.g_rr.iter().map(|c| c.norm_sqr()).sum::<f64>() / ch.g_rr.len() as f64;
    }
    for (name, total) in ["h_mm", "h_rm", "g_mr", "g_rr"].into_iter().zip(acc) {
        let mean = total / draws as f64;
        assert!((mean - 1.0).abs() < 0.02, "{name}: {mean}");
    }
}

#[test]
fn simulation_is_independent_of_thread_count() {
    let cfg = SystemConfig::new(6, 2, 2, 3.0, 1.0).unwrap();
    let plan = TrialPlan { batch_size: 500, ..TrialPlan::new(5_000, 99) };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(Scheme::Bf, &cfg, &plan, &McOptions::default()).unwrap())
    };
    assert_eq!(run(1), run(4));
}
