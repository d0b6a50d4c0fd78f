//! Irreversible investment under partial jump information.
//!
//! A compound Poisson reward is observed through a threshold sensor that only
//! reports jumps of size at least `eta`. The crate calibrates the barrier
//! functions that drive the optimal monotone (làdlàg) control, builds those
//! controls along simulated paths and evaluates them with the star integral.
//!
//! Module map:
//! - [`path_model`]: jump laws, event paths, risk atoms
//! - [`sensor`]: detection threshold and projected reward
//! - [`calibration`]: Monte Carlo constants and hitting-time functionals
//! - [`barrier`]: barrier functions and interpolation tables
//! - [`control`]: running-supremum controls
//! - [`integral`]: star integrals and value functionals
//! - [`fixtures`]: small exact fixtures for the integral identities
//! - [`toy`]: the bang-bang warm-up problem
//! - [`study`]: end-to-end pipelines used by the CLI and the acceptance suite

pub mod barrier;
pub mod calibration;
pub mod control;
pub mod error;
pub mod ext;
pub mod fixtures;
pub mod integral;
pub mod par;
pub mod path_model;
pub mod rng;
pub mod sensor;
pub mod stats;
pub mod study;
pub mod toy;

pub use error::{Error, Result};
pub use ext::Ext;
