//! Cooperative radio resource allocation: maximise the RUE sum rate under
//! per-RRH caps, a total RRH budget, the MBS cap and a per-MUE rate floor.
//!
//! MUE rate floors use the interference-limited SINR, so with threshold
//! `tau = 2^R_MS - 1` each floor is the linear constraint
//! `P_M (|h_k w_k|^2 - tau I_k) >= tau sum_i p_i |h_{R_i M_k}|^2`, where `I_k`
//! is the intra-tier leakage of the other MUE beams.

mod oracle;
mod waterfill;

pub use oracle::brute_force_oracle;
pub use waterfill::{solve_waterfill, WaterfillProblem, WaterfillSolution, GAP_TOL, MAX_DUAL_ITER};

use crate::channel::{ChannelRealization, SystemConfig};
use crate::precoder::{LinkGains, PrecoderSet};
use crate::{Error, Result, Scheme};

/// Outer iterations of the BF alternating optimisation.
pub const MAX_OUTER_ITER: usize = 500;
/// Relative change of the BF sum rate that ends the outer loop.
pub const OUTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p_m: f64,
    pub p_r: Vec<f64>,
    pub multipliers: Multipliers,
    /// Achieved RUE sum rate in bits/s/Hz.
    pub rue_sum_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    /// Objective after each iteration (dual steps for IC, outer steps for BF).
    pub trace: Vec<f64>,
    /// Smallest MBS power that keeps every MUE floor at the returned RRH
    /// powers (reported for IC, which keeps `P_M = P_MS`).
    pub p_m_min: f64,
}

/// One power allocation instance with the precoders already fixed.
#[derive(Debug, Clone)]
pub struct CrraProblem {
    pub cfg: SystemConfig,
    pub chan: ChannelRealization,
    pub scheme: Scheme,
    pub precoders: PrecoderSet,
    pub gains: LinkGains,
}

impl CrraProblem {
    pub fn new(cfg: SystemConfig, chan: ChannelRealization, scheme: Scheme) -> Result<Self> {
        let precoders = PrecoderSet::build(scheme, &chan)?;
        Self::with_precoders(cfg, chan, precoders)
    }

    pub fn with_precoders(cfg: SystemConfig, chan: ChannelRealization, precoders: PrecoderSet) -> Result<Self> {
        cfg.validate()?;
        if chan.m() != cfg.m || chan.k() != cfg.k || chan.n_b() != cfg.n_b {
            return Err(Error::InvalidConfig("channel shape does not match the configuration".into()));
        }
        if precoders.k() != cfg.k || precoders.w.rows() != cfg.n_b {
            return Err(Error::InvalidConfig("precoder shape does not match the configuration".into()));
        }
        let gains = LinkGains::new(&chan, &precoders);
        Ok(CrraProblem { scheme: precoders.scheme, cfg, chan, precoders, gains })
    }

    /// SINR threshold `2^R_MS - 1`.
    pub fn tau(&self) -> f64 {
        rate_threshold(self.cfg.r_ms)
    }

    /// RUE gains `|g_RR_i|^2 / (P_M sum_j |g_MR_i w_j|^2 + 1)`.
    pub fn rue_gains(&self, p_m: f64) -> Vec<f64> {
        self.gains.rue_direct.iter().zip(&self.gains.rue_mbs).map(|(d, l)| d / (p_m * l + 1.0)).collect()
    }

    /// `|h_k w_k|^2 / tau - I_k`; the MUE floor reads `P_M * this >= load_k`.
    pub fn mue_headroom(&self, k: usize) -> f64 {
        self.gains.desired[k] / self.tau() - self.gains.mue_intra[k]
    }

    /// RRH interference `sum_i p_i |h_{R_i M_k}|^2` at MUE `k`.
    pub fn mue_load(&self, k: usize, p_r: &[f64]) -> f64 {
        self.gains.rrh_interference(k, p_r)
    }

    /// RUE sum rate in bits/s/Hz (noise kept).
    pub fn rue_sum_rate(&self, p_m: f64, p_r: &[f64]) -> f64 {
        self.rue_gains(p_m).iter().zip(p_r).map(|(g, p)| (g * p).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
    }

    /// Smallest `P_M` meeting every MUE floor at RRH powers `p_r`, or
    /// `None` when some floor cannot be met at any MBS power.
    pub fn min_mbs_power(&self, p_r: &[f64]) -> Option<f64> {
        let tau = self.tau();
        if tau == 0.0 {
            return Some(0.0);
        }
        let mut p_min: f64 = 0.0;
        for k in 0..self.cfg.k {
            let load = tau * self.mue_load(k, p_r);
            let denom = self.gains.desired[k] - tau * self.gains.mue_intra[k];
            if denom < 0.0 || (denom == 0.0 && load > 0.0) {
                return None;
            }
            if load > 0.0 {
                p_min = p_min.max(load / denom);
            }
        }
        Some(p_min)
    }

    /// Worst relative violation of the MUE floors at `(p_m, p_r)`; non-positive
    /// when every floor holds.
    pub fn mue_violation(&self, p_m: f64, p_r: &[f64]) -> f64 {
        let tau = self.tau();
        if tau == 0.0 {
            return 0.0;
        }
        (0..self.cfg.k)
            .map(|k| {
                let need = tau * self.mue_load(k, p_r);
                let have = p_m * (self.gains.desired[k] - tau * self.gains.mue_intra[k]);
                (need - have) / (p_m * self.gains.desired[k]).max(1e-300)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// RRH water-filling subproblem at a fixed MBS power.
    pub fn waterfill(&self, p_m: f64) -> WaterfillProblem {
        let tau = self.tau();
        let (coupling, rhs) = if tau == 0.0 {
            (vec![], vec![])
        } else {
            let rhs = (0..self.cfg.k).map(|k| p_m * self.mue_headroom(k)).collect();
            (self.gains.cross.clone(), rhs)
        };
        WaterfillProblem {
            gains: self.rue_gains(p_m),
            caps: self.cfg.p_rs_i.clone(),
            budget: self.cfg.p_rs,
            coupling,
            rhs,
        }
    }
}

/// `2^r - 1`, infinite when the rate floor cannot be represented.
pub fn rate_threshold(r_ms: f64) -> f64 {
    r_ms.exp2() - 1.0
}

/// Whether every MUE can meet its floor at `P_M = P_MS`.
///
/// IC floors hold at zero RRH power for any finite threshold. BF floors
/// additionally need each MUE's beam gain to beat `tau` times its intra-tier
/// leakage.
pub fn check_feasibility(prob: &CrraProblem) -> bool {
    let tau = prob.tau();
    if !tau.is_finite() {
        return false;
    }
    if tau == 0.0 {
        return true;
    }
    match prob.scheme {
        Scheme::Ic => true,
        Scheme::Bf => (0..prob.cfg.k).all(|k| prob.mue_headroom(k) >= 0.0)
            && prob.min_mbs_power(&vec![0.0; prob.cfg.m]).is_some_and(|p| p <= prob.cfg.p_ms),
    }
}

fn ensure_feasible(prob: &CrraProblem) -> Result<()> {
    if !check_feasibility(prob) {
        return Err(Error::Infeasible(format!(
            "MUE rate floor {} bits/s/Hz cannot be met at P_MS = {}",
            prob.cfg.r_ms, prob.cfg.p_ms
        )));
    }
    Ok(())
}

/// IC allocation: `P_M = P_MS` and water-filling RRH powers under the MUE
/// interference budgets `A_k = P_MS |h_k w_k|^2 / tau`.
pub fn solve_ic(prob: &CrraProblem) -> Result<PowerAllocation> {
    if prob.scheme != Scheme::Ic {
        return Err(Error::InvalidConfig("solve_ic needs an IC problem".into()));
    }
    ensure_feasible(prob)?;
    let p_m = prob.cfg.p_ms;
    let sol = solve_waterfill(&prob.waterfill(p_m))?;
    let p_m_min = prob.min_mbs_power(&sol.p).unwrap_or(p_m);
    Ok(PowerAllocation {
        p_m,
        rue_sum_rate: prob.rue_sum_rate(p_m, &sol.p),
        multipliers: Multipliers { lambda: sol.lambda, mu: sol.mu, nu: pad_nu(sol.nu, prob.cfg.k) },
        p_r: sol.p,
        iterations: sol.iterations,
        converged: sol.converged,
        kkt_residual: sol.kkt_residual,
        trace: sol.trace,
        p_m_min,
    })
}

fn pad_nu(nu: Vec<f64>, k: usize) -> Vec<f64> {
    if nu.is_empty() {
        vec![0.0; k]
    } else {
        nu
    }
}

/// Log-spaced MBS powers scanned before the BF alternation starts.
pub const BF_SCAN_POINTS: usize = 48;

/// BF allocation by alternating optimisation: water-filling RRH powers at
/// fixed `P_M`, then the smallest `P_M` that keeps every MUE floor, until the
/// sum rate settles.
///
/// The alternation never raises `P_M` and stalls where a lower `P_M` would
/// first need less RRH power, typically short of the kink where an RRH
/// reaches its cap, and the best sum rate at fixed `P_M` can have several
/// such peaks. So besides the run from `P_MS`, every local maximum of a
/// log-spaced scan over `P_M` is refined by golden-section search and used as
/// a further starting point. The best run is returned.
pub fn solve_bf(prob: &CrraProblem) -> Result<PowerAllocation> {
    if prob.scheme != Scheme::Bf {
        return Err(Error::InvalidConfig("solve_bf needs a BF problem".into()));
    }
    ensure_feasible(prob)?;
    let mut best = alternate(prob, prob.cfg.p_ms)?;
    for p_m0 in fixed_mbs_peaks(prob)? {
        let run = alternate(prob, p_m0)?;
        if run.rue_sum_rate > best.rue_sum_rate * (1.0 + 1e-12) {
            best = run;
        }
    }
    Ok(best)
}

// Best RUE sum rate with P_M held fixed.
fn fixed_mbs_rate(prob: &CrraProblem, p_m: f64) -> Result<f64> {
    match solve_waterfill(&prob.waterfill(p_m)) {
        Ok(sol) => Ok(prob.rue_sum_rate(p_m, &sol.p)),
        Err(Error::InfeasibleInner { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

// Local maximisers of the fixed-P_M rate: every local maximum of a
// log-spaced scan, refined by golden-section search in its bracket.
fn fixed_mbs_peaks(prob: &CrraProblem) -> Result<Vec<f64>> {
    let cfg = &prob.cfg;
    // Above the MBS power that admits every feasible RRH allocation the MUE
    // rows never bind and the rates only fall. Each row's heaviest load is
    // found greedily over the caps and the total budget.
    let mut top: f64 = 0.0;
    for k in 0..cfg.k {
        let row = &prob.gains.cross[k];
        let mut order: Vec<usize> = (0..cfg.m).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        let mut left = cfg.p_rs;
        let mut p = vec![0.0; cfg.m];
        for i in order {
            p[i] = cfg.p_rs_i[i].min(left);
            left -= p[i];
        }
        top = top.max(prob.min_mbs_power(&p).unwrap_or(cfg.p_ms));
    }
    let top = top.min(cfg.p_ms);
    if !(top > 0.0) {
        return Ok(Vec::new());
    }
    let (ln_lo, ln_hi) = ((top * 1e-6).ln(), top.ln());
    let step = (ln_hi - ln_lo) / (BF_SCAN_POINTS - 1) as f64;
    let at = |j: usize| ln_lo + j as f64 * step;
    let values = (0..BF_SCAN_POINTS).map(|j| fixed_mbs_rate(prob, at(j).exp())).collect::<Result<Vec<_>>>()?;
    let mut peaks = Vec::new();
    for j in 0..BF_SCAN_POINTS {
        let left = if j > 0 { values[j - 1] } else { f64::NEG_INFINITY };
        let right = if j + 1 < BF_SCAN_POINTS { values[j + 1] } else { f64::NEG_INFINITY };
        if values[j] > 0.0 && values[j] >= left && values[j] > right {
            let (x, v) = golden_max(prob, at(j.saturating_sub(1)), at((j + 1).min(BF_SCAN_POINTS - 1)))?;
            peaks.push(if v >= values[j] { x } else { at(j) }.exp());
        }
    }
    Ok(peaks)
}

fn golden_max(prob: &CrraProblem, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = fixed_mbs_rate(prob, c.exp())?;
    let mut fd = fixed_mbs_rate(prob, d.exp())?;
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fixed_mbs_rate(prob, c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fixed_mbs_rate(prob, d.exp())?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

fn alternate(prob: &CrraProblem, p_m0: f64) -> Result<PowerAllocation> {
    let m = prob.cfg.m;
    let mut p_m = p_m0;
    let mut p_r = vec![0.0; m];
    let mut multipliers = Multipliers { lambda: vec![0.0; m], mu: 0.0, nu: vec![0.0; prob.cfg.k] };
    let mut kkt_residual = 0.0;
    let mut trace: Vec<f64> = Vec::new();
    let mut prev = prob.rue_sum_rate(p_m, &p_r);
    let mut converged = false;
    let mut iterations = 0;
    for outer in 1..=MAX_OUTER_ITER {
        iterations = outer;
        match solve_waterfill(&prob.waterfill(p_m)) {
            Ok(sol) => {
                p_r = sol.p;
                multipliers = Multipliers { lambda: sol.lambda, mu: sol.mu, nu: pad_nu(sol.nu, prob.cfg.k) };
                kkt_residual = sol.kkt_residual;
            }
            Err(Error::InfeasibleInner { .. }) => {
                p_r = vec![0.0; m];
                multipliers = Multipliers { lambda: vec![0.0; m], mu: 0.0, nu: vec![0.0; prob.cfg.k] };
            }
            Err(e) => return Err(e),
        }
        // MUE floors hold at the current P_M by construction, so the
        // smallest admissible P_M never exceeds it.
        p_m = match prob.min_mbs_power(&p_r) {
            Some(p) => p.clamp(0.0, p_m),
            None => return Err(Error::InfeasibleInner { k: 0 }),
        };
        let rate = prob.rue_sum_rate(p_m, &p_r);
        trace.push(rate);
        if (rate - prev).abs() <= OUTER_TOL * rate.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        prev = rate;
    }
    Ok(PowerAllocation {
        p_m,
        rue_sum_rate: prob.rue_sum_rate(p_m, &p_r),
        p_r,
        multipliers,
        iterations,
        converged,
        kkt_residual,
        trace,
        p_m_min: p_m,
    })
}

/// Solves with the scheme's own method.
pub fn solve(prob: &CrraProblem) -> Result<PowerAllocation> {
    prob.scheme.strategy().solve_crra(prob)
}
