//! Exhaustive grid search used to validate the solvers.

use super::{CrraProblem, Multipliers, PowerAllocation};
use crate::{Error, Result, Scheme};

/// Zoom levels after the initial grid; each re-grids a window of a few
/// cells around the incumbent.
const ZOOM_LEVELS: usize = 4;

/// Best feasible point on a grid with `grid_points` values per RRH power
/// axis, refined by local zooming.
///
/// IC keeps `P_M = P_MS`; the sum rate grows in every RRH power, so the
/// last RRH is set to its largest feasible value instead of being gridded.
/// BF takes the smallest admissible `P_M` for each RRH grid point, which is
/// optimal because the RUE rates fall with `P_M`.
pub fn brute_force_oracle(prob: &CrraProblem, grid_points: usize) -> Result<PowerAllocation> {
    let (m, k) = (prob.cfg.m, prob.cfg.k);
    if m > 3 || k > 2 {
        return Err(Error::InvalidConfig("grid oracle supports m <= 3 and k <= 2".into()));
    }
    if grid_points < 2 {
        return Err(Error::InvalidConfig("grid oracle needs at least 2 points per axis".into()));
    }
    if !super::check_feasibility(prob) {
        return Err(Error::Infeasible("no feasible grid point".into()));
    }
    let caps: Vec<f64> = prob.cfg.p_rs_i.iter().map(|c| c.min(prob.cfg.p_rs)).collect();
    let gridded = match prob.scheme {
        Scheme::Ic => m - 1,
        Scheme::Bf => m,
    };
    let mut lo = vec![0.0; gridded];
    let mut hi: Vec<f64> = caps[..gridded].to_vec();
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for _ in 0..=ZOOM_LEVELS {
        let steps: Vec<f64> = (0..gridded).map(|d| (hi[d] - lo[d]) / (grid_points - 1) as f64).collect();
        let total = grid_points.pow(gridded as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = vec![0.0; m];
            for d in 0..gridded {
                p[d] = (lo[d] + steps[d] * (rem % grid_points) as f64).min(caps[d]);
                rem /= grid_points;
            }
            if let Some((p_m, rate)) = evaluate(prob, &mut p, &caps) {
                if best.as_ref().map_or(true, |b| rate > b.1) {
                    best = Some((p_m, rate, p));
                }
            }
        }
        let Some((_, _, ref p)) = best else { break };
        for d in 0..gridded {
            let w = 2.0 * steps[d];
            lo[d] = (p[d] - w).max(0.0);
            hi[d] = (p[d] + w).min(caps[d]);
        }
    }
    let (p_m, rate, p_r) = best.ok_or_else(|| Error::Infeasible("no feasible grid point".into()))?;
    Ok(PowerAllocation {
        p_m,
        p_r,
        multipliers: Multipliers { lambda: vec![0.0; m], mu: 0.0, nu: vec![0.0; k] },
        rue_sum_rate: rate,
        iterations: 0,
        converged: true,
        kkt_residual: 0.0,
        trace: vec![rate],
        p_m_min: p_m,
    })
}

// Completes and scores one grid point; `None` if infeasible.
fn evaluate(prob: &CrraProblem, p: &mut [f64], caps: &[f64]) -> Option<(f64, f64)> {
    let m = p.len();
    let used: f64 = p.iter().sum();
    if used > prob.cfg.p_rs * (1.0 + 1e-12) {
        return None;
    }
    match prob.scheme {
        Scheme::Ic => {
            let p_m = prob.cfg.p_ms;
            let last = m - 1;
            p[last] = 0.0;
            let mut room = caps[last].min(prob.cfg.p_rs - used);
            if prob.tau() > 0.0 {
                for k in 0..prob.cfg.k {
                    let h = prob.gains.cross[k][last];
                    let slack = p_m * prob.mue_headroom(k) - prob.mue_load(k, p);
                    if h > 0.0 {
                        room = room.min(slack / h);
                    } else if slack < 0.0 {
                        return None;
                    }
                }
            }
            if room < 0.0 {
                return None;
            }
            p[last] = room;
            Some((p_m, prob.rue_sum_rate(p_m, p)))
        }
        Scheme::Bf => {
            let p_m = prob.min_mbs_power(p)?;
            if p_m > prob.cfg.p_ms {
                return None;
            }
            Some((p_m, prob.rue_sum_rate(p_m, p)))
        }
    }
}
