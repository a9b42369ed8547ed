//! Contextual probability spaces and their complex amplitude representation.
//!
//! Probabilities are exact rationals. Interference coefficients are classified
//! exactly; phases, amplitudes and operators are double precision.

pub mod error;
pub mod hilbert_map;
pub mod interference;
pub mod model_io;
pub mod operator_rep;
pub mod prob_core;

pub use error::{Error, Result};
pub use prob_core::{DichotomousVariable, Event, FiniteProbabilitySpace, Partition, Rational};
