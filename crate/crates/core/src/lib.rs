//! Generalised Mehler semigroups driven by Lévy noise: characteristics,
//! invariant measures, samplers, and numerical checks of functional
//! inequalities for the invariant measure.

pub mod error;
pub mod estimators;
pub mod exec;
pub mod functions;
pub mod inequalities;
pub mod levy;
pub mod linalg;
pub mod models;
pub mod quad;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
