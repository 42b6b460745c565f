//! Point-process toolkit for detecting intensity bursts in high-frequency
//! event data.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`sim`] — event-stream generators: homogeneous and doubly stochastic
//!   Poisson, exponential Hawkes, singular burst processes, diurnal
//!   modulation, and scenario composition under a heavy-traffic rate scale.
//! * [`estimate`] — binning, one- and two-sided kernel spot-intensity
//!   estimators, and intraday seasonality estimation/deflation.
//! * [`ibtest`] — the intensity-burst test statistic with its observed
//!   asymptotic local variance, candidate selection, and critical values.
//! * [`classify`] — burst-versus-jump discrimination at a known change
//!   point and estimation of the explosion rate.
//! * [`mc`] — a reproducible Monte Carlo harness producing rejection-rate
//!   tables. Replications run on rayon workers when the `parallel` feature
//!   (default) is enabled; a sequential driver is always available.
//!
//! All generators are pure functions of `(config, seed)`: identical inputs
//! give bitwise-identical output regardless of thread count.

pub mod classify;
pub mod error;
pub mod estimate;
pub mod ibtest;
pub mod io;
pub mod mc;
pub mod seed;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
