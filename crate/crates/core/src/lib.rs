//! Numerical laboratory for the bottom-of-spectrum statistics of a randomly
//! displaced lattice Schrödinger operator `-h Δ + Σ_q u(x - q - ξ_q)` on a
//! finite box, with optional hard-core obstacles around each displaced site.
//!
//! The crate provides, end to end:
//!
//! - sampling of the displacement field `ξ` from the density `exp(-|x|^θ)/Z`
//!   with deterministic per-site streams ([`randfield`]);
//! - finite-difference assembly of the Dirichlet/Neumann Hamiltonian
//!   ([`operator`]);
//! - an exact symmetric eigenvalue-counting engine (Householder reduction +
//!   Sturm bisection, [`spectra`]);
//! - Monte Carlo estimators of the integrated density of states and its
//!   Laplace transforms ([`ids`]);
//! - closed-form and variational asymptotic constants ([`asymptotics`]);
//! - Feynman-Kac path estimators of annealed survival/growth ([`fk`]);
//! - tail-exponent fitting ([`fit`]) and a config-driven runner ([`runner`]).
//!
//! Everything is deterministic given the master seed: replicate and site
//! streams are counter-based, so worker count never changes a result. The
//! `parallel` feature (on by default) runs replicate/path ensembles on rayon;
//! without it the same code runs sequentially.

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod fit;
pub mod fk;
pub mod ids;
pub mod io;
pub mod operator;
pub mod parallel;
pub mod params;
pub mod quad;
pub mod randfield;
pub mod rng;
pub mod runner;
pub mod spectra;

pub use error::{Error, Result};
pub use params::{ModelParams, PotentialSpec, Sign};
