//! Cylinder sets on dyadic grids and their measures, the non-mixing overlap
//! bound, dynamical-eigenvalue residues and the weak-mixing verdict.

mod cylinders;
mod eigen;
mod mixing;

pub use cylinders::{
    birkhoff_cylinder_estimate, build_cylinders, cylinder_measure, fixed_point_sample,
    partition_check, separation_constant, AlphaMeasure, BirkhoffCurve, CylinderClass, CylinderSet,
    GridSpec, PartitionReport, PointSample, Separation, BIRKHOFF_PROBES,
    DEFAULT_PARTITION_TOLERANCE,
};
pub use eigen::{
    eigenvalue_residues, eigenvalue_test, pisot_family_of_alpha, weak_mixing_verdict, EigenStatus,
    EigenvalueVerdict, MixingVerdict, PisotFamilyReport, Residue, ResidueSequence,
    WeakMixingReport,
};
pub use mixing::{mixing_overlap_bound, MixingBound, OverlapPoint, K0_SEARCH_MAX};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::geometry::GeometryError;
use crate::numberfield::NumberFieldError;
use crate::substitution::SubstitutionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    NumberField(#[from] NumberFieldError),
    #[error("sample contains duplicate points")]
    DuplicatePoints,
    #[error("empty sample")]
    EmptySample,
    #[error("grid level m = {m} is below m0 = {m0} for separation {eta}")]
    GridTooCoarse { m: u32, m0: u32, eta: f64 },
    #[error(
        "sample window too small: need side {needed}, have {available}; raise the sample level"
    )]
    SampleTooSmall { needed: f64, available: f64 },
    #[error("vector {0} is not witnessed as a legal return vector within k <= {1}")]
    NotWitnessed(String, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = SpectralError> = std::result::Result<T, E>;
