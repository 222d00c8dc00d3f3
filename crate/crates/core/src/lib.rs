//! Contact forms on Seifert bundles built from local invariant models:
//! Seifert invariants, contact graphs, invariant potentials, closed-orbit
//! enumeration, systolic ratios and a search over model families.

pub mod analysis;
pub mod error;
pub mod farey;
pub mod graph;
pub mod io;
pub mod model;
pub mod optimizer;
pub mod orbits;
pub mod poly;
pub mod potential;
pub mod rational;
pub mod seifert;

pub use error::{Error, Result};
pub use rational::Rational;
