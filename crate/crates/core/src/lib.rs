//! Secrecy-outage-aware design of hybrid UAV-RIS / STAR-RIS / holographic-RIS
//! downlinks.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] places and evolves the network nodes (PPP placement,
//!   random-waypoint mobility, Markov blockage).
//! * [`channel`] turns a scenario into stochastic link realizations
//!   (3GPP TR 38.901 pathloss and LoS probability, ITU-R P.2109 building
//!   entry loss, Rician/Rayleigh fading, CSI-error covariances).
//! * [`surfaces`] holds the three reconfigurable-surface parameterizations
//!   and their feasibility projections.
//! * [`link`] composes effective channels and evaluates SINRs, secrecy rates
//!   and the outage indicator.
//! * [`robust`] builds Bernstein-type deterministic surrogates of the QoS and
//!   secrecy chance constraints.
//! * [`optimizer`] runs the block SCA / alternating-optimization loop.
//! * [`harness`] estimates outage by Monte-Carlo, implements the baselines,
//!   runs parameter sweeps and hosts the command-line front end.

pub mod channel;
pub mod harness;
pub mod linalg;
pub mod link;
pub mod optimizer;
pub mod rng;
pub mod robust;
pub mod scenario;
pub mod surfaces;

mod error;

pub use error::{Error, Result};
pub use link::Design;
pub use num_complex::Complex64;
