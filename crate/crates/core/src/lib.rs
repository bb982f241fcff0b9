//! Nonlocal reaction-diffusion in a thin curved gully.
//!
//! The crate solves the full problem on a tubular band around a planar axis
//! curve (in Fermi coordinates) and the reduced problem on the axis itself,
//! and measures how the transverse average of the former approaches the
//! latter as the band narrows.

pub mod analysis;
pub mod check;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod model;
pub mod reduction;
pub mod solver;
pub mod suite;

pub use error::{GullyError, Result};
