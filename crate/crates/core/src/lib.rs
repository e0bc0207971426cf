//! Analysis toolkit for self-affine tile substitutions in ℝ^d.

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod geometry;
pub mod numberfield;
pub mod spectral;
pub mod substitution;
