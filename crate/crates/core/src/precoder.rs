//! MBS precoders and exact per-link SINR evaluation.

use crate::channel::ChannelRealization;
use crate::linalg::{self, CMatrix};
use crate::{Error, Result, Scheme, C64};

/// Below this effective-channel norm a draw is treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// `K` unit-norm precoding vectors, column `k` serving MUE `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub scheme: Scheme,
    /// `n_b x k`.
    pub w: CMatrix,
}

impl PrecoderSet {
    pub fn from_columns(scheme: Scheme, columns: &[Vec<C64>]) -> Self {
        let n_b = columns.first().map_or(0, Vec::len);
        let mut w = CMatrix::zeros(n_b, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                w[(i, j)] = *z;
            }
        }
        PrecoderSet { scheme, w }
    }

    pub fn build(scheme: Scheme, chan: &ChannelRealization) -> Result<Self> {
        let strategy = scheme.strategy();
        let columns = (0..chan.k()).map(|k| strategy.precoder(chan, k)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_columns(scheme, &columns))
    }

    pub fn k(&self) -> usize {
        self.w.cols()
    }
}

/// Null-space basis of `rows`; see [`linalg::null_space_basis`].
pub fn null_space_basis(rows: &CMatrix) -> Result<CMatrix> {
    linalg::null_space_basis(rows)
}

/// IC precoder for MUE `k`: the unit vector in the null space of every RUE
/// channel and every other MUE channel that maximises `|h_k w|^2`.
pub fn ic_precoder(chan: &ChannelRealization, k: usize) -> Result<Vec<C64>> {
    let n_b = chan.n_b();
    let others = (0..chan.m())
        .map(|i| chan.g_mr.row(i))
        .chain((0..chan.k()).filter(|&j| j != k).map(|j| chan.h_mm.row(j)));
    let stacked = CMatrix::from_rows(n_b, others);
    let basis = null_space_basis(&stacked)?;
    let h = chan.h_mm.row(k);
    // effective channel h_k C_k
    let eff: Vec<C64> = (0..basis.cols())
        .map(|c| (0..n_b).map(|l| h[l] * basis[(l, c)]).sum())
        .collect();
    let eff_norm = linalg::norm(&eff);
    if eff_norm < DEGENERATE_NORM {
        return Err(Error::DegenerateChannel(format!(
            "MUE {k} has no gain inside the null space (|h C| = {eff_norm:e})"
        )));
    }
    Ok((0..n_b)
        .map(|l| (0..basis.cols()).map(|c| basis[(l, c)] * eff[c].conj()).sum::<C64>() / eff_norm)
        .collect())
}

/// BF (matched filter) precoder for MUE `k`.
pub fn bf_precoder(chan: &ChannelRealization, k: usize) -> Result<Vec<C64>> {
    let h = chan.h_mm.row(k);
    let h_norm = linalg::norm(h);
    if h_norm < DEGENERATE_NORM {
        return Err(Error::DegenerateChannel(format!("MUE {k} channel norm {h_norm:e}")));
    }
    Ok(h.iter().map(|z| z.conj() / h_norm).collect())
}

/// Squared effective gains of one realization under a fixed precoder set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    /// `|h_k w_k|^2`.
    pub desired: Vec<f64>,
    /// `sum_{j != k} |h_k w_j|^2`.
    pub mue_intra: Vec<f64>,
    /// `cross[k][i] = |h_{R_i M_k}|^2`.
    pub cross: Vec<Vec<f64>>,
    /// `|g_RR_i|^2`.
    pub rue_direct: Vec<f64>,
    /// `sum_j |g_MR_i w_j|^2`.
    pub rue_mbs: Vec<f64>,
}

impl LinkGains {
    pub fn new(chan: &ChannelRealization, prec: &PrecoderSet) -> Self {
        let (k_n, m_n) = (chan.k(), chan.m());
        let hw = chan.h_mm.matmul(&prec.w);
        let gw = chan.g_mr.matmul(&prec.w);
        let desired = (0..k_n).map(|k| hw[(k, k)].norm_sqr()).collect();
        let mue_intra = (0..k_n)
            .map(|k| (0..k_n).filter(|&j| j != k).map(|j| hw[(k, j)].norm_sqr()).sum())
            .collect();
        let cross = (0..k_n)
            .map(|k| (0..m_n).map(|i| chan.h_rm[(i, k)].norm_sqr()).collect())
            .collect();
        let rue_direct = chan.g_rr.iter().map(|z| z.norm_sqr()).collect();
        let rue_mbs = (0..m_n).map(|i| (0..k_n).map(|j| gw[(i, j)].norm_sqr()).sum()).collect();
        LinkGains { desired, mue_intra, cross, rue_direct, rue_mbs }
    }

    pub fn k(&self) -> usize {
        self.desired.len()
    }

    pub fn m(&self) -> usize {
        self.rue_direct.len()
    }

    /// RRH interference `sum_i p_r[i] |h_{R_i M_k}|^2` seen by MUE `k`.
    pub fn rrh_interference(&self, k: usize, p_r: &[f64]) -> f64 {
        self.cross[k].iter().zip(p_r).map(|(h, p)| h * p).sum()
    }
}

/// Per-link SINRs of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrVector {
    pub mue: Vec<f64>,
    pub rue: Vec<f64>,
    /// Whether the MUE denominators kept the unit noise term.
    pub noise_included: bool,
}

impl SinrVector {
    /// Smallest SINR over every MUE and RUE link.
    pub fn min(&self) -> f64 {
        self.mue.iter().chain(&self.rue).copied().fold(f64::INFINITY, f64::min)
    }
}

/// Exact SINRs for powers `p_m` (per MBS antenna) and `p_r` (per RRH).
///
/// RUE links always keep the unit noise term. MUE links keep it only when
/// `include_noise` is set; otherwise the interference-limited form applies
/// and a zero denominator with non-zero signal is reported as
/// [`Error::InfiniteSinr`]. A zero signal gives SINR 0.
pub fn evaluate_sinr(
    chan: &ChannelRealization,
    prec: &PrecoderSet,
    p_m: f64,
    p_r: &[f64],
    include_noise: bool,
) -> Result<SinrVector> {
    sinr_from_gains(&LinkGains::new(chan, prec), p_m, p_r, include_noise)
}

pub fn sinr_from_gains(g: &LinkGains, p_m: f64, p_r: &[f64], include_noise: bool) -> Result<SinrVector> {
    if p_r.len() != g.m() {
        return Err(Error::InvalidConfig(format!(
            "{} RRH powers given for {} RRHs",
            p_r.len(),
            g.m()
        )));
    }
    if !(p_m >= 0.0) || p_r.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidConfig("powers must be non-negative".into()));
    }
    let noise = if include_noise { 1.0 } else { 0.0 };
    let mue = (0..g.k())
        .map(|k| {
            let signal = p_m * g.desired[k];
            let denom = p_m * g.mue_intra[k] + g.rrh_interference(k, p_r) + noise;
            if signal == 0.0 {
                Ok(0.0)
            } else if denom == 0.0 {
                Err(Error::InfiniteSinr { link: format!("MUE {k}") })
            } else {
                Ok(signal / denom)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let rue = (0..g.m())
        .map(|i| p_r[i] * g.rue_direct[i] / (p_m * g.rue_mbs[i] + 1.0))
        .collect();
    Ok(SinrVector { mue, rue, noise_included: include_noise })
}
