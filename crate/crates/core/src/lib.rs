//! Certified defense against adversarial patches by single-round masking.
//!
//! A mask set is a collection of rectangular occluders tiled over the image so
//! that every admissible patch location is fully hidden by at least `k`
//! masks. Classifying each masked view once and aggregating the votes gives a
//! prediction whose robustness to any patch of the given size can be decided
//! from the clean votes alone.

pub mod adversary;
pub mod certify;
pub mod classifier;
pub mod cli;
pub mod coverage;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod image;
pub mod masking;
pub mod tiling;

pub use error::{Error, Result};
