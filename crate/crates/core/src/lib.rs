//! Constructive approximation machinery on stratified polyhedral subsets of
//! R^n: C^1 bump functions and partitions of unity with certified gradient
//! bounds, inner (geodesic) metric computation, and Lipschitz-controlled C^1
//! smoothing of piecewise-Lipschitz maps. Every construction is paired with
//! a numerical verification certificate.

pub mod bump;
pub mod complex;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod inner;
pub mod map;
pub mod partition;
pub mod report;
pub mod rng;
pub mod sample;
pub mod smoothing;
pub mod subspace;
pub mod tol;

pub use error::{Error, Result};
