//! Bacteria foraging optimization of a four-objective sand-mould response
//! surface, with interchangeable stochastic engines and frontier metrics.
//!
//! * [`engines`]: seeded Gaussian, Weibull, Gamma and chaotic number sources.
//! * [`problem`]: the quadratic response surfaces, bounds and weighted sum.
//! * [`bfa`]: the optimizer (chemotaxis, swarming, reproduction, dispersal).
//! * [`metrics`]: Pareto filter, exact and Monte Carlo hypervolume, AER.
//! * [`experiment`]: weight sweeps, frontier reports, persistence.
//! * [`cli`]: the `nbfa` command.

pub mod bfa;
pub mod cli;
pub mod engines;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod problem;

pub use error::{Error, Result};
