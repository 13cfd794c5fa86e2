//! Coverage analysis of cellular networks that combine terrestrial base
//! stations clustered around a town center with aerial base stations kept
//! outside an exclusion disk.
//!
//! The analytic side (`nearest`, `association`, `interference`, `coverage`)
//! evaluates nearest-transmitter distance laws, association probabilities,
//! Laplace transforms of interference and SINR coverage by quadrature. The
//! `montecarlo` module samples full network realizations and serves as an
//! independent oracle.

pub mod association;
pub mod channel;
pub mod coverage;
pub mod error;
pub mod geometry;
pub mod interference;
pub mod montecarlo;
pub mod nearest;
pub mod numerics;
pub mod params;

pub use error::{Error, Result};
pub use geometry::{RegionId, UserFrame};
pub use params::{BsKind, NetworkParams, PerKind, RawParams};
