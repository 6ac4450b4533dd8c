//! Inertial spin (IS) model of flocking.
//!
//! The crate covers three levels of description:
//!
//! * the N-agent particle system, deterministic and stochastic, with
//!   distance- and rank-based communication weights ([`model`],
//!   [`interactions`], [`integrators`]);
//! * flocking diagnostics and the mean-field equilibrium theory of the
//!   constant-coupling system ([`analysis`], [`meanfield`]);
//! * zero-range mono-kinetic continuum limits: expansion coefficients, the
//!   hyperbolic PDE system, rotating solutions and traveling curves
//!   ([`monokinetic`]).
//!
//! Everything here is pure computation over `alloc` collections; file
//! formats, configuration and the command line live in the `ism` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "parallel")]
extern crate std;

mod error;

pub mod analysis;
pub mod geometry;
pub mod init;
pub mod integrators;
pub mod interactions;
pub mod meanfield;
pub mod model;
pub mod monokinetic;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{Mat3, Vec3};
