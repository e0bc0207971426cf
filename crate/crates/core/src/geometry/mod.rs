//! Prototile supports from the adjoint set equations, raster volumes and
//! representability diagnostics, van Hove boxes and the local rubber metric.

mod ifs;
mod mask;
mod metric;
mod render;
mod window;

pub use ifs::{
    boundary_scan, default_resolution, prototile_volumes, raster_coverage, representability_check,
    set_equation_residual, solve_adjoint_ifs, BoundaryScan, IfsSolution, PrototileVolumes,
    Representability, REPRESENTABILITY_TOLERANCE,
};
pub use mask::RegionMask;
pub use metric::{rubber_metric, ColouredPoint, RubberDistance, RUBBER_CAP};
pub use render::{mask_to_pgm, mask_to_svg, patch_to_svg, PALETTE};
pub use window::{vanhove_ratio, Window};

use thiserror::Error;

use crate::substitution::SubstitutionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("degenerate region: {0}")]
    Degenerate(String),
    #[error("resolution must be positive and finite, got {0}")]
    Resolution(f64),
    #[error("expansion map is numerically singular")]
    NonInvertible,
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("masks have different resolutions or dimensions")]
    Incompatible,
    #[error("raster domain of {0} cells exceeds the cell budget; use a coarser resolution")]
    TooManyCells(usize),
    #[error("Perron-Frobenius eigenvalue {pf} differs from |det Q| = {det}")]
    VolumeMismatch { pf: f64, det: f64 },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
