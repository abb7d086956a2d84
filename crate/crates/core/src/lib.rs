//! riesz-lab: a small laboratory for order structure in vector lattices.
//!
//! Everything order-theoretic is decided in exact rational arithmetic.
//! Floating point appears only in optional display helpers, never in a
//! predicate.

pub mod diagnostics;
pub mod error;
pub mod lattice;
pub mod operators;
pub mod pwl;
pub mod rational;
pub mod runner;
pub mod sampling;
pub mod spaces;

pub use diagnostics::{ProbeReport, Verdict};
pub use error::{Error, Result};
pub use lattice::{FiniteSet, LatticeElement, DEFAULT_CLOSURE_CAP};
pub use operators::{MatrixOp, RankOneOp};
pub use pwl::PwlFunc;
pub use rational::Rational;
pub use runner::{ExperimentConfig, RunManifest};
pub use sampling::SampleSpec;
pub use spaces::{Element, NeighborhoodSpec, SpaceTag};
