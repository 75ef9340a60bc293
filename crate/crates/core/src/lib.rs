//! Simulation and Monte Carlo verification toolkit for a size-structured
//! branching population in a time-varying environment and its spine.
//!
//! - [`model`]: closed forms of the growth–fragmentation model.
//! - [`popsim`]: exact simulation of the population forest and its ancestral lineages.
//! - [`spinesim`]: simulation of the spine process and the Feynman–Kac reweighting.
//! - [`verify`]: Monte Carlo checks with pass / fail / inconclusive outcomes.
//! - [`config`] and [`runner`]: declarative experiments and report emission.

// `!(x > 0.0)` deliberately rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod functional;
pub mod mc;
pub mod model;
pub mod popsim;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod spinesim;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use functional::{NamedFunctional, PathFunctional, PathWindow};
pub use model::{EnvironmentProfile, ModelParams};
pub use popsim::{simulate_forest, Forest, ForestCaps, Label};
pub use spinesim::{simulate_spine, SpinePath};
pub use stats::{DecayFit, EstimatorReport};
