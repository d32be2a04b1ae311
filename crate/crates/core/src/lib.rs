//! Exact, Pfaffian and Monte Carlo computations for the three-parameter 1-2
//! model on the `n x n` toroidal hexagonal lattice.
//!
//! The crate is organised by method:
//!
//! * [`lattice`]: the torus `H_n`, its half-edge refinement, the gadget-decorated
//!   graph carrying the dimer model, and diagonal paths between NW/SE edges.
//! * [`model`]: configurations, weights and brute-force enumeration (small `n`).
//! * [`pfaffian`]: the Pfaffian kernel, Kasteleyn orientation, torus partition
//!   functions, inverse Kasteleyn entries and Pfaffian correlation formulas.
//! * [`spectral`]: the characteristic polynomial and the phase classifier.
//! * [`transforms`]: the Ising-type and polygon reformulations.
//! * [`mcmc`]: a Metropolis sampler with cluster statistics.
//! * [`report`]: CSV/JSON/SVG writers shared by the command-line tool.

pub mod error;
pub mod lattice;
pub mod mcmc;
pub mod model;
pub mod pfaffian;
pub mod report;
pub mod spectral;
pub mod transforms;

mod sum;

pub use error::{Error, Result};
pub use lattice::{
    DecoratedGraph, DiagonalPath, DimerCover, EdgeKind, HalfEdgeGraph, TorusLattice,
};
pub use mcmc::{Chain, ClusterStats, MoveMix};
pub use model::{ClusterDecomposition, ModelParams, OneTwoConfig, Signature};
pub use pfaffian::{BlockY, KasteleynSystem, SkewMatrix};
pub use spectral::{Phase, PhasePoint};
pub use transforms::Couplings;
