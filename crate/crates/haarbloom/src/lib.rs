//! Dyadic Haar analysis on finite grids.
//!
//! The crate builds finite dyadic grids, expands step functions in the Haar
//! basis, measures Muckenhoupt characteristics and dyadic BMO norms of
//! weights and symbols, applies dyadic shifts, paraproducts and their
//! commutators, and estimates weighted `L^p -> L^p` operator norms to probe
//! two-weight norm inequalities numerically. Exact algebraic identities are
//! verified to near machine precision; norm bounds are explored through
//! randomized sweeps driven by the `haarbloom` CLI.

pub mod bmo;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod haar;
pub mod operators;
pub mod opnorm;
pub mod sweep;
pub mod tol;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{Cube, Grid, GridDescriptor};
pub use haar::{analyze, synthesize, HaarCoeffs, Signature, StepFunction};
