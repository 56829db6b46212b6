//! Secure massive NOMA downlink laboratory.
//!
//! A single-cell massive MIMO base station serves clusters of users with
//! superposition coding and per-cluster MRT beams. Channel state is acquired
//! through non-orthogonal pilots that an active eavesdropper contaminates by
//! replaying the cluster pilot, so every beam leaks a controlled amount of
//! power toward the attacker. The crate provides three coordinated views of
//! that system:
//!
//! * a trial-level simulator ([`estimation`], [`airlink`], [`montecarlo`])
//!   that draws fading realizations and measures per-user SINRs,
//! * closed-form ergodic-rate machinery ([`rates`]) with large-antenna and
//!   high-power asymptotes, and
//! * linear-programming power control ([`lp`], [`optimizer`]) over pilot
//!   powers and downlink transmit powers.
//!
//! All powers are linear SNRs relative to unit receiver noise; decibel
//! values exist only at the CLI boundary ([`scenario`]).

pub mod airlink;
pub mod config;
pub mod estimation;
pub mod lp;
pub mod montecarlo;
pub mod optimizer;
pub mod rates;
pub mod rng;
pub mod scenario;

pub use config::{ClusterConfig, SeedSpec, SystemConfig, UserConfig, ValidationReport};
pub use estimation::{ChannelRealization, EstimationModel};
pub use rates::{PowerFractions, RateMode, RateReport};
