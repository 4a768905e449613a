//! Exact finite-domain tools for domain generalization: error rates and
//! domain risk, the domain shattering dimension, min-max ERM, lower-bound
//! constructions, divergences and covers, and seeded experiment harnesses.

pub mod cli;
pub mod constructions;
pub mod dimensions;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod io;
pub mod learner;
pub mod model;
pub mod rational;
pub mod sampling;

pub use error::{Error, Result};
pub use rational::{q, Rational};
