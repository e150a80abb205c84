//! Precoding schemes as interchangeable strategies.
//!
//! Each scheme bundles its precoder, its link statistics and its power
//! allocation method behind [`PrecodingScheme`]. Strategies are registered
//! by name and looked up at runtime, so callers (the CLI in particular)
//! never branch on the scheme themselves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{self, AnalyticOptions};
use crate::channel::{ChannelRealization, SystemConfig};
use crate::crra::{self, CrraProblem, PowerAllocation};
use crate::precoder;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ic,
    Bf,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Ic, Scheme::Bf];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ic => "ic",
            Scheme::Bf => "bf",
        }
    }

    /// The registered strategy implementing this scheme.
    pub fn strategy(self) -> &'static dyn PrecodingScheme {
        match self {
            Scheme::Ic => &IcScheme,
            Scheme::Bf => &BfScheme,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        lookup(s).map(|st| st.scheme())
    }
}

/// Receiver class of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Mue,
    Rue,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Mue => "MUE",
            Link::Rue => "RUE",
        })
    }
}

/// Everything that differs between the precoding schemes.
pub trait PrecodingScheme: Send + Sync {
    fn scheme(&self) -> Scheme;

    fn name(&self) -> &'static str {
        self.scheme().name()
    }

    fn description(&self) -> &'static str;

    /// Unit-norm precoding vector for MUE `k`.
    fn precoder(&self, chan: &ChannelRealization, k: usize) -> Result<Vec<C64>>;

    /// `P(SINR >= x)` of the given link class.
    fn survival(&self, link: Link, x: f64, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64>;

    /// Ergodic capacity of one link of the given class.
    fn link_capacity(&self, link: Link, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64>;

    fn solve_crra(&self, prob: &CrraProblem) -> Result<PowerAllocation>;
}

impl fmt::Debug for dyn PrecodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrecodingScheme({})", self.name())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IcScheme;

impl PrecodingScheme for IcScheme {
    fn scheme(&self) -> Scheme {
        Scheme::Ic
    }

    fn description(&self) -> &'static str {
        "interference collaboration: zero-forcing in the null space of RUE and other MUE channels"
    }

    fn precoder(&self, chan: &ChannelRealization, k: usize) -> Result<Vec<C64>> {
        precoder::ic_precoder(chan, k)
    }

    fn survival(&self, link: Link, x: f64, cfg: &SystemConfig, _opts: &AnalyticOptions) -> Result<f64> {
        analytic::ic_survival(link, x, cfg)
    }

    fn link_capacity(&self, link: Link, cfg: &SystemConfig, _opts: &AnalyticOptions) -> Result<f64> {
        analytic::ic_capacity(link, cfg)
    }

    fn solve_crra(&self, prob: &CrraProblem) -> Result<PowerAllocation> {
        crra::solve_ic(prob)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BfScheme;

impl PrecodingScheme for BfScheme {
    fn scheme(&self) -> Scheme {
        Scheme::Bf
    }

    fn description(&self) -> &'static str {
        "beamforming: matched filter towards the intended MUE"
    }

    fn precoder(&self, chan: &ChannelRealization, k: usize) -> Result<Vec<C64>> {
        precoder::bf_precoder(chan, k)
    }

    fn survival(&self, link: Link, x: f64, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
        analytic::bf_survival(link, x, cfg, opts)
    }

    fn link_capacity(&self, link: Link, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
        analytic::bf_capacity(link, cfg, opts)
    }

    fn solve_crra(&self, prob: &CrraProblem) -> Result<PowerAllocation> {
        crra::solve_bf(prob)
    }
}

static REGISTRY: [&dyn PrecodingScheme; 2] = [&IcScheme, &BfScheme];

/// All registered strategies, in registration order.
pub fn registered() -> &'static [&'static dyn PrecodingScheme] {
    &REGISTRY
}

/// Case-insensitive lookup by registered name.
pub fn lookup(name: &str) -> Result<&'static dyn PrecodingScheme> {
    let wanted = name.trim().to_ascii_lowercase();
    REGISTRY.iter().copied().find(|s| s.name() == wanted).ok_or_else(|| {
        let known: Vec<_> = REGISTRY.iter().map(|s| s.name()).collect();
        Error::InvalidConfig(format!("unknown scheme '{name}' (known: {})", known.join(", ")))
    })
}
