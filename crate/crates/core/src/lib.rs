//! Link-level simulator for RIS-assisted integrated location sensing and
//! superimposed-pilot (SP) uplink communication.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] – frames, spherical coordinates and UPA steering vectors.
//! * [`channel`] – Rician BS–RIS / RIS–UE links, cascaded channel synthesis
//!   and the deterministic channel statistics used everywhere else.
//! * [`sensing`] – downlink sensing model, Fisher information / CRB and the
//!   2D-IFFT angle estimator with quasi-Newton refinement.
//! * [`sp_link`] – SP uplink: LMMSE estimation, MRC detection, Monte-Carlo
//!   ergodic rate and the closed-form lower bound.
//! * [`optimize`] – RIS phase search (GA, SA, random baseline).
//! * [`harness`] – configuration, mobility, frame simulation and the
//!   reproducible experiment sweeps behind the CLI.

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod optimize;
pub mod rng;
pub mod sensing;
pub mod sp_link;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
