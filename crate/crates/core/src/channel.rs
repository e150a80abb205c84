//! Scenario configuration, reproducible random streams and Rayleigh channel
//! draws.
//!
//! Every scalar channel coefficient is circularly symmetric complex Gaussian
//! with unit variance, so `|h|^2` is a unit-mean exponential and the squared
//! gain of an `L`-dimensional effective channel is Gamma(L, 1). There is no
//! path loss: all links are statistically identical regardless of geometry.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::{Error, Result, C64};

/// Scenario scalars shared by every module. Powers are linear and normalised
/// to the receiver noise power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// MBS antenna count.
    pub n_b: usize,
    /// Number of RRHs, each serving one RUE.
    pub m: usize,
    /// Number of MUEs.
    pub k: usize,
    /// Per-antenna MBS transmit power.
    pub p_m: f64,
    /// Common per-RRH transmit power used by the closed-form analysis.
    pub p_r: f64,
    /// MBS power cap for power allocation.
    #[serde(default)]
    pub p_ms: f64,
    /// Per-RRH power caps for power allocation.
    #[serde(default)]
    pub p_rs_i: Vec<f64>,
    /// Total RRH power budget for power allocation.
    #[serde(default)]
    pub p_rs: f64,
    /// Linear SINR outage threshold.
    #[serde(default)]
    pub gamma_th: f64,
    /// MUE QoS rate threshold in bits/s/Hz.
    #[serde(default)]
    pub r_ms: f64,
}

#[derive(Deserialize)]
struct ConfigFile {
    system: SystemConfig,
}

impl SystemConfig {
    /// Minimal analysis-mode configuration. Power-allocation fields default
    /// to `p_ms = p_m`, `p_rs_i = p_r` and `p_rs = m * p_r`.
    pub fn new(n_b: usize, m: usize, k: usize, p_m: f64, p_r: f64) -> Result<Self> {
        let cfg = SystemConfig {
            n_b,
            m,
            k,
            p_m,
            p_r,
            p_ms: p_m,
            p_rs_i: vec![p_r; m],
            p_rs: p_r * m as f64,
            gamma_th: 1.0,
            r_ms: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gamma_th(mut self, gamma_th: f64) -> Self {
        self.gamma_th = gamma_th;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.k == 0 {
            return bad(format!("m and k must be positive (m={}, k={})", self.m, self.k));
        }
        if self.n_b < self.m + self.k {
            return bad(format!(
                "n_b = {} must be at least m + k = {}",
                self.n_b,
                self.m + self.k
            ));
        }
        let scalars = [
            ("p_m", self.p_m),
            ("p_r", self.p_r),
            ("p_ms", self.p_ms),
            ("p_rs", self.p_rs),
            ("gamma_th", self.gamma_th),
            ("r_ms", self.r_ms),
        ];
        for (name, v) in scalars {
            if !(v >= 0.0) || v.is_infinite() {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if self.p_rs_i.len() != self.m {
            return bad(format!(
                "p_rs_i has {} entries, expected m = {}",
                self.p_rs_i.len(),
                self.m
            ));
        }
        if let Some(v) = self.p_rs_i.iter().find(|v| !(**v >= 0.0) || v.is_infinite()) {
            return bad(format!("p_rs_i entries must be finite and non-negative, got {v}"));
        }
        Ok(())
    }

    /// Parses either a bare table of fields or a document with a `[system]`
    /// section.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg = match toml::from_str::<ConfigFile>(text) {
            Ok(file) => file.system,
            Err(_) => toml::from_str::<SystemConfig>(text).map_err(|e| Error::Parse(e.to_string()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Per-RRH power vector of the analysis mode (every RRH at `p_r`).
    pub fn common_rrh_powers(&self) -> Vec<f64> {
        vec![self.p_r; self.m]
    }
}

/// One draw of every channel in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `k x n_b`, row `k` is the MBS -> MUE_k channel.
    pub h_mm: CMatrix,
    /// `m x k`, entry `(i, k)` is the RRH_i -> MUE_k interference channel.
    pub h_rm: CMatrix,
    /// `m x n_b`, row `i` is the MBS -> RUE_i interference channel.
    pub g_mr: CMatrix,
    /// RRH_i -> RUE_i desired channel.
    pub g_rr: Vec<C64>,
}

impl ChannelRealization {
    pub fn n_b(&self) -> usize {
        self.h_mm.cols()
    }

    pub fn m(&self) -> usize {
        self.g_rr.len()
    }

    pub fn k(&self) -> usize {
        self.h_mm.rows()
    }
}

/// Counter-based random stream: `(seed, stream_id)` selects an independent
/// ChaCha8 key-stream, so trials can be generated in any order.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// One CN(0, 1) sample.
    pub fn complex_normal(&mut self) -> C64 {
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }

    fn fill(&mut self, rows: usize, cols: usize) -> CMatrix {
        let data = (0..rows * cols).map(|_| self.complex_normal()).collect();
        CMatrix::from_row_major(rows, cols, data)
    }
}

/// Draws one realization. Fills `h_mm`, `h_rm`, `g_mr` and `g_rr` in that
/// order, row-major, from the stream.
pub fn draw_channel(cfg: &SystemConfig, rng: &mut RngStream) -> ChannelRealization {
    let h_mm = rng.fill(cfg.k, cfg.n_b);
    let h_rm = rng.fill(cfg.m, cfg.k);
    let g_mr = rng.fill(cfg.m, cfg.n_b);
    let g_rr = (0..cfg.m).map(|_| rng.complex_normal()).collect();
    ChannelRealization { h_mm, h_rm, g_mr, g_rr }
}
