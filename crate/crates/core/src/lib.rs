//! Non-Hermitian tight-binding models on finite Cayley trees.
//!
//! The tree carries a drain `−iγ₀` on the origin and a source `+iγ_N` on
//! every peripheral site. Its eigenbasis splits into localized families
//! ([`localized`]) and the extended states of an `(N+1)`-site effective chain
//! ([`chain`]); [`spectral`] provides the dense oracle that checks both.
//!
//! ## Examples
//!
//! - `tree_eigenbasis`: analytical spectrum of a tree against the dense solver
//! - `localized_states`: families, counts and eigenvalues of localized states
//! - `secular_roots`: effective-chain roots across the exceptional point
//! - `currents`: average current along a coupling sweep
//! - `random_ensemble`: landmarks of random-hopping chains
//! - `scattering`: transmission through the gain/loss dimer
//! - `resolvent_identity`: projection onto a subset of sites
//!
//! ```bash
//! cargo run --example tree_eigenbasis -- 3,2,4 0.2 0.7
//! cargo run --release --example random_ensemble -- 9 40
//! ```
//!
//! The `bethe-pt` binary wraps the same functions in subcommands that write
//! CSV tables, SVG plots and a manifest (see [`cli`]).

pub mod chain;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod localized;
pub mod random;
pub mod scattering;
pub mod sparse;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
