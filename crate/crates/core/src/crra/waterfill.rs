//! Generic multi-constraint water-filling:
//!
//! maximise `sum_i ln(1 + g_i p_i)` subject to `0 <= p_i <= cap_i`,
//! `sum_i p_i <= budget` and `sum_i h[k][i] p_i <= rhs[k]` for every `k`.
//!
//! For fixed multipliers `(mu, nu)` the maximiser is
//! `p_i = clip(1 / s_i - 1 / g_i, 0, cap_i)` with `s_i = mu + sum_k nu_k h[k][i]`.
//! The dual function is convex and piecewise twice differentiable, so it is
//! minimised with a projected Newton method and an Armijo line search.

use crate::{Error, Result};

/// Total Newton steps before [`Error::NoConvergence`].
pub const MAX_DUAL_ITER: usize = 10_000;
/// Dual Newton steps before switching to the primal barrier method.
pub const DUAL_STEPS_BEFORE_BARRIER: usize = 300;
/// Relative duality gap treated as converged.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillProblem {
    pub gains: Vec<f64>,
    pub caps: Vec<f64>,
    pub budget: f64,
    /// `h[k][i]`: load that power `i` puts on coupling constraint `k`.
    pub coupling: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub p: Vec<f64>,
    pub mu: f64,
    pub nu: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Objective in bits.
    pub objective_bits: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    /// Best feasible objective (bits) after each dual iteration.
    pub trace: Vec<f64>,
}

impl WaterfillProblem {
    pub fn validate(&self) -> Result<()> {
        let m = self.gains.len();
        if self.caps.len() != m || self.coupling.iter().any(|r| r.len() != m) || self.coupling.len() != self.rhs.len() {
            return Err(Error::InvalidConfig("water-filling shapes disagree".into()));
        }
        let all = self.gains.iter().chain(&self.caps).chain(self.coupling.iter().flatten());
        if all.copied().chain([self.budget]).any(|v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig("gains, caps, couplings and budget must be finite and non-negative".into()));
        }
        if let Some(k) = self.rhs.iter().position(|r| !(*r >= 0.0)) {
            return Err(Error::InfeasibleInner { k });
        }
        Ok(())
    }

    pub fn objective_nats(&self, p: &[f64]) -> f64 {
        self.gains.iter().zip(p).map(|(g, p)| (g * p).ln_1p()).sum()
    }

    /// Largest scaling in `[0, 1]` that makes `p` feasible.
    fn feasible_scale(&self, p: &[f64]) -> f64 {
        let mut t: f64 = 1.0;
        let total: f64 = p.iter().sum();
        if total > self.budget {
            t = t.min(self.budget / total);
        }
        for (row, rhs) in self.coupling.iter().zip(&self.rhs) {
            let load: f64 = row.iter().zip(p).map(|(h, p)| h * p).sum();
            if load > *rhs {
                t = t.min(rhs / load);
            }
        }
        t.max(0.0)
    }

    /// Largest violation of the primal constraints, relative to each bound.
    pub fn primal_violation(&self, p: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (pi, cap) in p.iter().zip(&self.caps) {
            v = v.max(-pi).max((pi - cap) / cap.max(1.0));
        }
        v = v.max((p.iter().sum::<f64>() - self.budget) / self.budget.max(1.0));
        for (row, rhs) in self.coupling.iter().zip(&self.rhs) {
            let load: f64 = row.iter().zip(p).map(|(h, p)| h * p).sum();
            v = v.max((load - rhs) / rhs.max(1.0));
        }
        v
    }
}

// Working copy with trivially fixed variables removed.
struct Reduced<'a> {
    prob: &'a WaterfillProblem,
    active: Vec<usize>,
    rows: Vec<usize>,
    mu_max: f64,
    nu_max: Vec<f64>,
}

struct DualEval {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
    p: Vec<f64>,
}

impl<'a> Reduced<'a> {
    fn new(prob: &'a WaterfillProblem) -> Self {
        // a coupling row with zero right-hand side forces its loads to zero
        let blocked: Vec<bool> = (0..prob.gains.len())
            .map(|i| prob.coupling.iter().zip(&prob.rhs).any(|(row, rhs)| *rhs == 0.0 && row[i] > 0.0))
            .collect();
        let active: Vec<usize> = (0..prob.gains.len())
            .filter(|&i| !blocked[i] && prob.gains[i] > 0.0 && prob.caps[i] > 0.0)
            .collect();
        let rows: Vec<usize> = (0..prob.rhs.len())
            .filter(|&k| prob.rhs[k] > 0.0 && active.iter().any(|&i| prob.coupling[k][i] > 0.0))
            .collect();
        let mu_max = active.iter().map(|&i| prob.gains[i]).fold(0.0, f64::max);
        let nu_max = rows
            .iter()
            .map(|&k| {
                active
                    .iter()
                    .filter(|&&i| prob.coupling[k][i] > 0.0)
                    .map(|&i| prob.gains[i] / prob.coupling[k][i])
                    .fold(0.0, f64::max)
            })
            .collect();
        Reduced { prob, active, rows, mu_max, nu_max }
    }

    fn dim(&self) -> usize {
        1 + self.rows.len()
    }

    fn upper(&self, j: usize) -> f64 {
        if j == 0 {
            self.mu_max
        } else {
            self.nu_max[j - 1]
        }
    }

    fn shadow(&self, theta: &[f64], i: usize) -> f64 {
        theta[0] + self.rows.iter().enumerate().map(|(r, &k)| theta[r + 1] * self.prob.coupling[k][i]).sum::<f64>()
    }

    fn primal(&self, theta: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.prob.gains.len()];
        for &i in &self.active {
            let s = self.shadow(theta, i);
            let (g, cap) = (self.prob.gains[i], self.prob.caps[i]);
            p[i] = if s <= 0.0 { cap } else { (1.0 / s - 1.0 / g).clamp(0.0, cap) };
        }
        p
    }

    fn coeff(&self, j: usize, i: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            self.prob.coupling[self.rows[j - 1]][i]
        }
    }

    fn bound(&self, j: usize) -> f64 {
        if j == 0 {
            self.prob.budget
        } else {
            self.prob.rhs[self.rows[j - 1]]
        }
    }

    fn eval(&self, theta: &[f64]) -> DualEval {
        let d = self.dim();
        let p = self.primal(theta);
        let mut value = self.prob.objective_nats(&p);
        let mut grad = vec![0.0; d];
        for j in 0..d {
            let load: f64 = self.active.iter().map(|&i| self.coeff(j, i) * p[i]).sum();
            grad[j] = self.bound(j) - load;
            value += theta[j] * grad[j];
        }
        let mut hess = vec![vec![0.0; d]; d];
        for &i in &self.active {
            if p[i] > 0.0 && p[i] < self.prob.caps[i] {
                let s = self.shadow(theta, i);
                let w = 1.0 / (s * s);
                for a in 0..d {
                    for b in 0..d {
                        hess[a][b] += w * self.coeff(a, i) * self.coeff(b, i);
                    }
                }
            }
        }
        DualEval { value, grad, hess, p }
    }

    fn project(&self, theta: &mut [f64]) {
        for (j, t) in theta.iter_mut().enumerate() {
            *t = t.clamp(0.0, self.upper(j));
        }
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Solves the water-filling problem. The budget multiplier is searched alone
/// first; the coupling multipliers join only if that solution violates a
/// coupling row.
pub fn solve_waterfill(prob: &WaterfillProblem) -> Result<WaterfillSolution> {
    prob.validate()?;
    // Try the budget alone first: if its solution already respects every
    // coupling row, the coupling multipliers are all zero.
    let budget_only = WaterfillProblem { coupling: vec![], rhs: vec![], ..prob.clone() };
    let first = dual_newton(&budget_only, &Reduced::new(&budget_only), prob, 0.0)?;
    let coupling_ok = prob.coupling.iter().zip(&prob.rhs).all(|(row, rhs)| {
        let load: f64 = row.iter().zip(&first.p).map(|(h, p)| h * p).sum();
        load <= rhs * (1.0 + 1e-12)
    });
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut raw = first;
    if !(raw.converged && coupling_ok) {
        let floor = raw.trace.last().copied().unwrap_or(0.0) * std::f64::consts::LN_2;
        iterations += raw.iterations;
        trace.append(&mut raw.trace);
        raw = if coupling_ok {
            // the budget-only dual stalled; its coupling rows are slack
            barrier(&budget_only, &Reduced::new(&budget_only), prob, floor)?
        } else {
            let red = Reduced::new(prob);
            let second = dual_newton(prob, &red, prob, floor)?;
            if second.converged {
                second
            } else {
                let floor = second.trace.last().copied().unwrap_or(floor);
                iterations += second.iterations;
                trace.extend(&second.trace);
                barrier(prob, &red, prob, floor * std::f64::consts::LN_2)?
            }
        };
    }
    iterations += raw.iterations;
    trace.append(&mut raw.trace);
    let mut out = finish(prob, raw);
    out.iterations = iterations;
    out.trace = trace;
    Ok(out)
}

struct RawSolution {
    p: Vec<f64>,
    theta: Vec<f64>,
    rows: Vec<usize>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

// `full` is the problem whose feasible objective is traced; `floor` is the
// traced value carried over from an earlier phase.
fn dual_newton(prob: &WaterfillProblem, red: &Reduced, full: &WaterfillProblem, floor: f64) -> Result<RawSolution> {
    let d = red.dim();
    let mut traced = floor;
    let mut theta = vec![0.0; d];
    let mut best_p = vec![0.0; prob.gains.len()];
    let mut best = 0.0;
    let mut trace = Vec::new();
    if red.active.is_empty() {
        return Ok(RawSolution { p: best_p, theta, rows: red.rows.clone(), iterations: 0, converged: true, trace });
    }
    let mut ev = red.eval(&theta);
    for iter in 1..=DUAL_STEPS_BEFORE_BARRIER {
        let scale = prob.feasible_scale(&ev.p);
        let cand: Vec<f64> = ev.p.iter().map(|v| v * scale).collect();
        let obj = prob.objective_nats(&cand);
        if obj >= best {
            best = obj;
            best_p = cand;
        }
        let full_scale = full.feasible_scale(&ev.p);
        let full_obj = full.objective_nats(&ev.p.iter().map(|v| v * full_scale).collect::<Vec<_>>());
        traced = traced.max(full_obj);
        trace.push(traced / std::f64::consts::LN_2);
        // stop once the dual bound is tight and the dual iterate itself is
        // primal feasible, so stationarity holds at the returned point
        let gap = ev.value - best;
        if gap <= GAP_TOL * best.max(1.0) && (scale >= 1.0 - 1e-12 || gap <= 1e-15 * best.max(1.0)) {
            return Ok(RawSolution { p: best_p, theta, rows: red.rows.clone(), iterations: iter, converged: true, trace });
        }

        // free coordinates: not pinned at a bound by the sign of the gradient
        let free: Vec<usize> = (0..d)
            .filter(|&j| !((theta[j] <= 0.0 && ev.grad[j] > 0.0) || (theta[j] >= red.upper(j) && ev.grad[j] < 0.0)))
            .collect();
        let mut dir = vec![0.0; d];
        let hff: Vec<Vec<f64>> = free.iter().map(|&a| free.iter().map(|&b| ev.hess[a][b]).collect()).collect();
        let gf: Vec<f64> = free.iter().map(|&a| -ev.grad[a]).collect();
        let newton = if free.is_empty() { None } else { solve_dense(hff, gf) };
        match newton {
            Some(step) if step.iter().zip(&free).map(|(s, &j)| s * ev.grad[j]).sum::<f64>() < 0.0 => {
                for (s, &j) in step.iter().zip(&free) {
                    dir[j] = *s;
                }
            }
            _ => {
                // projected gradient step sized to the multiplier box
                let gnorm = free.iter().map(|&j| ev.grad[j] * ev.grad[j]).sum::<f64>().sqrt();
                if gnorm == 0.0 {
                    break;
                }
                let width = (0..d).map(|j| red.upper(j)).fold(0.0, f64::max);
                for &j in &free {
                    dir[j] = -ev.grad[j] / gnorm * width;
                }
            }
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let mut trial: Vec<f64> = theta.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            red.project(&mut trial);
            let slope: f64 = (0..d).map(|j| ev.grad[j] * (trial[j] - theta[j])).sum();
            let te = red.eval(&trial);
            if te.value <= ev.value + 1e-4 * slope && te.value <= ev.value {
                accepted = Some((trial, te));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, te)) => {
                if trial == theta {
                    break;
                }
                theta = trial;
                ev = te;
            }
            None => break,
        }
    }
    // stalled: the dual cannot be decreased further in floating point
    let iterations = trace.len();
    let gap = ev.value - best;
    let converged = gap <= 1e-6 * best.max(1.0) && iterations < DUAL_STEPS_BEFORE_BARRIER;
    Ok(RawSolution { p: best_p, theta, rows: red.rows.clone(), iterations, converged, trace })
}

/// Primal log-barrier Newton method, used when the dual iteration stalls
/// on a rank-deficient Hessian. Multipliers are read off the barrier slacks.
fn barrier(prob: &WaterfillProblem, red: &Reduced, full: &WaterfillProblem, floor: f64) -> Result<RawSolution> {
    let n = prob.gains.len();
    let act = &red.active;
    let rows = &red.rows;
    let mut trace = Vec::new();
    let mut traced = floor;
    let d = red.dim();
    if act.is_empty() || prob.budget == 0.0 {
        return Ok(RawSolution { p: vec![0.0; n], theta: vec![0.0; d], rows: rows.clone(), iterations: 0, converged: true, trace });
    }
    let na = act.len();
    let h = |r: usize, j: usize| prob.coupling[rows[r]][act[j]];
    let rhs = |r: usize| prob.rhs[rows[r]];
    // strictly interior start
    let mut x: Vec<f64> = act
        .iter()
        .map(|&i| {
            let mut v = prob.caps[i].min(prob.budget / na as f64);
            for &k in rows {
                if prob.coupling[k][i] > 0.0 {
                    v = v.min(prob.rhs[k] / (na as f64 * prob.coupling[k][i]));
                }
            }
            0.5 * v
        })
        .collect();
    let n_cons = (2 * na + 1 + rows.len()) as f64;
    let slacks = |x: &[f64]| -> (Vec<f64>, f64, Vec<f64>) {
        let upper: Vec<f64> = x.iter().zip(act).map(|(v, &i)| prob.caps[i] - v).collect();
        let budget = prob.budget - x.iter().sum::<f64>();
        let coupling = (0..rows.len()).map(|r| rhs(r) - (0..na).map(|j| h(r, j) * x[j]).sum::<f64>()).collect();
        (upper, budget, coupling)
    };
    let phi = |x: &[f64], t: f64| -> f64 {
        let (up, b, c) = slacks(x);
        if x.iter().any(|v| *v <= 0.0) || up.iter().any(|v| *v <= 0.0) || b <= 0.0 || c.iter().any(|v| *v <= 0.0) {
            return f64::NEG_INFINITY;
        }
        let obj: f64 = x.iter().zip(act).map(|(v, &i)| (prob.gains[i] * v).ln_1p()).sum();
        t * obj + x.iter().map(|v| v.ln()).sum::<f64>() + up.iter().map(|v| v.ln()).sum::<f64>() + b.ln()
            + c.iter().map(|v| v.ln()).sum::<f64>()
    };
    let mut t = 1.0;
    let mut steps = 0;
    let mut scatter = vec![0.0; n];
    loop {
        for _ in 0..200 {
            steps += 1;
            if steps > MAX_DUAL_ITER {
                return Err(Error::NoConvergence { iterations: steps });
            }
            let (up, b, c) = slacks(&x);
            let mut grad = vec![0.0; na];
            let mut hess = vec![vec![0.0; na]; na];
            for j in 0..na {
                let g = prob.gains[act[j]];
                let q = 1.0 + g * x[j];
                grad[j] = t * g / q + 1.0 / x[j] - 1.0 / up[j] - 1.0 / b;
                hess[j][j] += t * g * g / (q * q) + 1.0 / (x[j] * x[j]) + 1.0 / (up[j] * up[j]);
                for r in 0..rows.len() {
                    grad[j] -= h(r, j) / c[r];
                }
            }
            for a in 0..na {
                for bb in 0..na {
                    hess[a][bb] += 1.0 / (b * b);
                    for r in 0..rows.len() {
                        hess[a][bb] += h(r, a) * h(r, bb) / (c[r] * c[r]);
                    }
                }
            }
            let Some(dx) = solve_dense(hess, grad.clone()) else { break };
            let decrement: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            if !(decrement > 1e-12) {
                break;
            }
            let base = phi(&x, t);
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(v, d)| v + step * d).collect();
                if phi(&trial, t) >= base + 0.25 * step * decrement {
                    x = trial;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            for (j, &i) in act.iter().enumerate() {
                scatter[i] = x[j];
            }
            traced = traced.max(full.objective_nats(&scaled(full, &scatter)));
            trace.push(traced / std::f64::consts::LN_2);
            if !moved {
                break;
            }
        }
        if n_cons / t <= 1e-11 {
            break;
        }
        t *= 10.0;
    }
    let (up, b, c) = slacks(&x);
    let mut theta = vec![0.0; d];
    theta[0] = (1.0 / (t * b)).min(red.upper(0));
    for r in 0..rows.len() {
        theta[r + 1] = (1.0 / (t * c[r])).min(red.upper(r + 1));
    }
    // snap variables whose bound multiplier is clearly active
    let mut p = vec![0.0; n];
    for (j, &i) in act.iter().enumerate() {
        let g = prob.gains[i];
        let marginal = g / (1.0 + g * x[j]);
        p[i] = if 1.0 / (t * x[j]) > 1e-6 * marginal.max(1e-300) && x[j] < 1e-6 * prob.caps[i] {
            0.0
        } else if 1.0 / (t * up[j]) > 1e-6 * marginal.max(1e-300) && up[j] < 1e-6 * prob.caps[i] {
            prob.caps[i]
        } else {
            x[j]
        };
    }
    let p = scaled(prob, &p);
    Ok(RawSolution { p, theta, rows: rows.clone(), iterations: trace.len(), converged: true, trace })
}

fn scaled(prob: &WaterfillProblem, p: &[f64]) -> Vec<f64> {
    let s = prob.feasible_scale(p);
    p.iter().map(|v| v * s).collect()
}

fn finish(prob: &WaterfillProblem, raw: RawSolution) -> WaterfillSolution {
    let mut nu = vec![0.0; prob.rhs.len()];
    for (r, &k) in raw.rows.iter().enumerate() {
        nu[k] = raw.theta[r + 1];
    }
    let p = raw.p;
    let (mut resid, mut lambda) = kkt(prob, &p, raw.theta[0], &nu);
    let mut mu = raw.theta[0];
    // barrier multipliers are only accurate to the final barrier weight
    if let Some((mu2, nu2)) = refit_multipliers(prob, &p) {
        let (resid2, lambda2) = kkt(prob, &p, mu2, &nu2);
        if resid2 < resid {
            (resid, lambda, mu, nu) = (resid2, lambda2, mu2, nu2);
        }
    }
    WaterfillSolution {
        objective_bits: prob.objective_nats(&p) / std::f64::consts::LN_2,
        p,
        mu,
        nu,
        lambda,
        iterations: raw.iterations,
        converged: raw.converged && resid <= 1e-6,
        kkt_residual: resid,
        trace: raw.trace,
    }
}

/// KKT residual of `p` under the given multipliers, with the cap multipliers it implies.
fn kkt(prob: &WaterfillProblem, p: &[f64], mu: f64, nu: &[f64]) -> (f64, Vec<f64>) {
    let shadow = |i: usize| mu + prob.coupling.iter().zip(nu).map(|(row, n)| n * row[i]).sum::<f64>();
    let mut lambda = vec![0.0; p.len()];
    let mut resid: f64 = 0.0;
    for i in 0..p.len() {
        let g = prob.gains[i];
        let cap = prob.caps[i];
        if cap == 0.0 || g == 0.0 {
            continue;
        }
        // a blocked variable carries an unbounded coupling price
        let blocked = prob.coupling.iter().zip(&prob.rhs).any(|(row, rhs)| *rhs == 0.0 && row[i] > 0.0);
        if blocked {
            continue;
        }
        // Each power is read as interior, at zero or at its cap, whichever
        // leaves the smallest residual; a bound reading pays for its slack
        // through complementary slackness.
        let gap = g / (1.0 + g * p[i]) - shadow(i);
        let scale = cap.max(1.0);
        let interior = gap.abs();
        let at_zero = gap.max(0.0).max((-gap).max(0.0) * p[i] / scale);
        let at_cap = (-gap).max(0.0).max(gap.max(0.0) * (cap - p[i]) / scale);
        let best = interior.min(at_zero).min(at_cap);
        if best == at_cap && at_cap < interior {
            lambda[i] = gap.max(0.0);
        }
        resid = resid.max(best);
    }
    resid = resid.max(prob.primal_violation(p).max(0.0));
    let slack = prob.budget - p.iter().sum::<f64>();
    resid = resid.max(mu * slack / prob.budget.max(1.0));
    for (k, (row, rhs)) in prob.coupling.iter().zip(&prob.rhs).enumerate() {
        let load: f64 = row.iter().zip(p).map(|(h, p)| h * p).sum();
        resid = resid.max(nu[k] * (rhs - load) / rhs.max(1.0));
    }
    (resid, lambda)
}

/// Least-squares multipliers for the tight constraints, fitted on the
/// coordinates strictly inside their boxes.
fn refit_multipliers(prob: &WaterfillProblem, p: &[f64]) -> Option<(f64, Vec<f64>)> {
    const TIGHT: f64 = 1e-9;
    let n = p.len();
    let mut rows: Vec<(Option<usize>, Vec<f64>)> = Vec::new();
    if prob.budget - p.iter().sum::<f64>() <= TIGHT * prob.budget.max(1.0) {
        rows.push((None, vec![1.0; n]));
    }
    for (k, (row, rhs)) in prob.coupling.iter().zip(&prob.rhs).enumerate() {
        let load: f64 = row.iter().zip(p).map(|(h, p)| h * p).sum();
        if *rhs > 0.0 && rhs - load <= TIGHT * rhs.max(1.0) {
            rows.push((Some(k), row.clone()));
        }
    }
    let free: Vec<usize> = (0..n)
        .filter(|&i| prob.gains[i] > 0.0 && p[i] > TIGHT * prob.caps[i] && p[i] < prob.caps[i] * (1.0 - TIGHT))
        .collect();
    if rows.is_empty() || free.len() < rows.len() {
        return None;
    }
    let d = rows.len();
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for &i in &free {
        let m = prob.gains[i] / (1.0 + prob.gains[i] * p[i]);
        for r in 0..d {
            b[r] += rows[r].1[i] * m;
            for c in 0..d {
                a[r][c] += rows[r].1[i] * rows[c].1[i];
            }
        }
    }
    let theta = solve_dense(a, b)?;
    if theta.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return None;
    }
    let mut mu = 0.0;
    let mut nu = vec![0.0; prob.rhs.len()];
    for ((which, _), t) in rows.iter().zip(theta) {
        match which {
            None => mu = t,
            Some(k) => nu[*k] = t,
        }
    }
    Some((mu, nu))
}
