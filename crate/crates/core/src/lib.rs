//! Downlink H-CRAN link-level toolkit.
//!
//! A macro base station (MBS) with `n_b` antennas serves `k` single-antenna
//! MUEs while `m` single-antenna RRHs, each with one RUE, share the carrier.
//! Two MBS precoders suppress the inter-tier interference:
//!
//! * interference collaboration (IC): zero-forcing in the null space of all
//!   RUE channels and the other MUE channels;
//! * beamforming (BF): matched filtering towards the intended MUE.
//!
//! The crate evaluates closed-form outage, capacity and BER for both schemes
//! ([`analytic`]), validates them by simulation ([`montecarlo`]) and solves the
//! RUE sum-rate power allocation problems ([`crra`]). The schemes are
//! interchangeable strategies looked up by name through [`scheme`].

pub mod analytic;
pub mod channel;
pub mod crra;
mod error;
pub mod linalg;
pub mod montecarlo;
pub mod precoder;
pub mod quad;
pub mod scheme;
pub mod special;

pub use channel::{ChannelRealization, RngStream, SystemConfig};
pub use error::{Error, Result};
pub use scheme::{Link, Scheme};

/// Complex scalar used for every channel coefficient.
pub type C64 = num_complex::Complex64;
