//! Glauber dynamics for proper q-colouring of simple k-uniform hypergraphs.
//!
//! The crate provides:
//!
//! - hypergraph and colouring types with validation and plain-text file
//!   formats ([`hypergraph`], [`io`]);
//! - instance generators, including blocked instances on which the dynamics
//!   has no legal move ([`generate`]);
//! - the single-site sampler with O(deg v) steps and a maximally coupled
//!   two-chain harness with an exact one-step Hamming expectation
//!   ([`chain`], [`coupling`]);
//! - goodness diagnostics with exact rational thresholds and regime
//!   condition checks ([`diagnostics`]);
//! - brute-force exact oracles for desk-scale instances: dense distribution
//!   evolution, total-variation distances, and the component structure of
//!   the Glauber graph on proper colourings ([`oracle`]).
//!
//! The numeric kernels are generic over the scalar: dense distributions
//! over any [`scalar::Real`] float, coupling expectations over any
//! [`scalar::Weight`] including [`Rational`] for exact arithmetic.

pub mod chain;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod generate;
pub mod hypergraph;
pub mod io;
pub mod oracle;
pub mod rng;
pub mod scalar;

pub use chain::{ChainState, RunSummary, Start, StepRecord};
pub use coupling::{CoalescenceResult, CoupledChains, CoupledStepRecord};
pub use error::{Error, Result};
pub use generate::BlockedInstance;
pub use hypergraph::{Colouring, Hypergraph, SimplicityReport};

/// Exact rational scalar; [`coupling::expected_hamming_one_step`] and the
/// goodness thresholds use it for exact comparisons.
pub type Rational = num_rational::BigRational;

/// Default floating-point scalar.
pub type Float = f64;

/// Dense distribution over Ω in the default float.
pub type Distribution = oracle::ExactDistribution<Float>;

/// Dense distribution in single precision, for memory-tight sweeps.
pub type Distribution32 = oracle::ExactDistribution<f32>;
