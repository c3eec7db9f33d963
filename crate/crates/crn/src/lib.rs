//! Analysis of stochastic biomolecular reaction networks: decomposed
//! state-spaces, certified irreducible communication classes of the
//! underlying Markov chain, product-form stationary distributions and
//! exact or slow-scale stochastic simulation.
//!
//! The pipeline runs in three stages. Exact rational linear algebra
//! ([`linalg`]) classifies every species as bounded, free or restricted and
//! produces a decomposed state-space ([`decomp`]). Birth/death-cascade
//! analysis over the reduced network ([`cascade`], [`comm`], [`reduce`])
//! certifies the irreducible state-spaces. Certified classes feed the
//! stationary-distribution constructions ([`stationary`]), the simulators
//! ([`sim`]) and brute-force verification on truncated lattices
//! ([`oracle`]). Parsing, reporting and orchestration live in [`io`].

pub mod cascade;
pub mod comm;
pub mod decomp;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod reduce;
pub mod sim;
pub mod stationary;

#[cfg(test)]
pub mod testnets;
