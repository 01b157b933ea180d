//! Downlink two-user power-domain NOMA over Nakagami-m fading: closed-form
//! and Monte Carlo bit error rates.
//!
//! * [`specfun`]: Q function, Gamma, Gauss hypergeometric, fading averages.
//! * [`linkmodel`]: power split, fading profiles, constellation, SNR terms.
//! * [`analytic`]: instantaneous and fading-averaged BER expressions.
//! * [`phy`]: channel, noise and SIC receiver used by the simulator.
//! * [`mcengine`]: batched, seeded, parallel Monte Carlo estimation.

pub mod analytic;
pub mod error;
pub mod linkmodel;
pub mod mcengine;
pub mod phy;
pub mod specfun;

pub use analytic::{ber_pair_avg, far_ber_avg, near_ber_avg, BerPair, SignVariant};
pub use error::{Error, Result};
pub use linkmodel::{db_to_linear, gamma_terms, FadingProfile, GammaTerms, LinkConfig, PowerSplit, SymbolBits};
pub use mcengine::{
    derive_seed, AnalyticPoint, BerEstimate, CurvePoint, Engine, LinkTemplate, PointEstimate, StopRule, SweepAxis,
    SweepSpec,
};
pub use phy::TrialOutcome;
